//! Acceptance checks, one test per criterion. Each prints a single
//! `criterion N: PASS|FAIL ...` line and then asserts.

use std::f64::consts::LN_2;
use std::time::Instant;

use loopcover::complete::{beta_regime_estimate, laplace_tail_bound_check, mc_complete_cover_prob, normalized_cover_cdf};
use loopcover::graph::{
    build_complete, build_cycle, build_cycle_with_chords, build_torus, build_tree_ball, chord_edges,
    random_connected, stationary_distribution, transition_matrix, WeightedGraph,
};
use loopcover::limits::{complete_trace, torus_limit_j, tree_ball_j, tree_ball_limit_spectrum, TorusJMethod};
use loopcover::loops::{exact_cover_mass_dp, exact_cover_probability, soup_cover_counts, KillingRate};
use loopcover::rng::replicate_rng;
use loopcover::spectral::{
    default_odd_loop_system, default_path_system, interlacing_bracket_check, matrix_power_trace, odd_loop_bound,
    partial_loop_mass_rate, perturbation_report, poincare_bound, return_probability_bound_check, trace_power,
    trace_tail_check,
};
use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn report(n: u32, pass: bool, detail: String, start: Instant) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} {detail} ({:.1}s)", start.elapsed().as_secs_f64());
}

/// Compensated running sum; hundreds of millions of walk weights are added.
#[derive(Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Covered and total mass per loop length `2..=max_len`, by listing every
/// pointed closed walk.
fn enumerate_loops(g: &WeightedGraph, c: KillingRate, max_len: usize) -> (Vec<f64>, Vec<f64>) {
    let q = transition_matrix(g).unwrap();
    let m = g.vertex_count();
    let adj: Vec<Vec<(usize, f64)>> = (0..m)
        .map(|x| (0..m).filter(|&y| q.get(x, y) > 0.0).map(|y| (y, q.get(x, y))).collect())
        .collect();
    let full = (1u32 << m) - 1;
    let mut covered = vec![Neumaier::default(); max_len + 1];
    let mut total = vec![Neumaier::default(); max_len + 1];

    struct Walk<'a> {
        adj: &'a [Vec<(usize, f64)>],
        base: usize,
        full: u32,
        max_len: usize,
        covered: &'a mut [Neumaier],
        total: &'a mut [Neumaier],
    }

    fn step(w: &mut Walk, at: usize, steps: usize, mask: u32, weight: f64) {
        if steps >= 1 {
            if let Some(&(_, p)) = w.adj[at].iter().find(|&&(y, _)| y == w.base) {
                let k = steps + 1;
                w.total[k].add(weight * p);
                if mask == w.full {
                    w.covered[k].add(weight * p);
                }
            }
        }
        if steps + 1 >= w.max_len {
            return;
        }
        for &(y, p) in w.adj[at].iter() {
            step(w, y, steps + 1, mask | (1 << y), weight * p);
        }
    }

    for base in 0..m {
        let mut w = Walk {
            adj: &adj,
            base,
            full,
            max_len,
            covered: &mut covered,
            total: &mut total,
        };
        step(&mut w, base, 0, 1 << base, 1.0);
    }
    let rho = c.rho();
    let scale = |v: Vec<Neumaier>| -> Vec<f64> {
        (2..=max_len).map(|k| v[k].value() * rho.powi(k as i32) / k as f64).collect()
    };
    (scale(covered), scale(total))
}

#[test]
fn criterion_01_exact_oracle_equivalence() {
    let start = Instant::now();
    let mut graphs: Vec<WeightedGraph> = Vec::new();
    graphs.extend((3..=8).map(|n| build_cycle(n).unwrap()));
    graphs.extend((2..=8).map(|n| build_complete(n).unwrap()));
    graphs.extend((3..=7).map(|d| build_tree_ball(d, 1).unwrap()));
    let mut rng = replicate_rng(2024, 0);
    for _ in 0..20 {
        let m = rng.random_range(3..=8);
        let p = rng.random_range(0.1..0.7);
        graphs.push(random_connected(m, p, (0.5, 2.0), &mut rng).unwrap());
    }
    let c = KillingRate::new(0.3).unwrap();
    let mut worst = 0.0f64;
    for g in &graphs {
        assert!(g.vertex_count() <= 8 && g.is_connected());
        let dp = exact_cover_mass_dp(g, c, 10).unwrap();
        let (covered, total) = enumerate_loops(g, c, 10);
        for k in 0..covered.len() {
            worst = worst.max((dp.covered[k] - covered[k]).abs());
            worst = worst.max((dp.total[k] - total[k]).abs());
        }
    }
    let pass = worst <= 1e-12;
    report(1, pass, format!("{} graphs, max |DP - enumeration| = {worst:e}", graphs.len()), start);
    assert!(pass);
}

#[test]
fn criterion_02_trace_identities() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 2..=8 {
        let q = transition_matrix(&build_complete(n).unwrap()).unwrap();
        for k in 1..=20 {
            let closed = complete_trace(n, k).unwrap();
            worst = worst.max((closed - trace_power(&q, k).unwrap()).abs());
            worst = worst.max((closed - matrix_power_trace(&q, k)).abs());
        }
    }
    let pass = worst <= 1e-9;
    report(2, pass, format!("max trace discrepancy {worst:e}"), start);
    assert!(pass);
}

#[test]
fn criterion_03_torus_j() {
    let start = Instant::now();
    let quad = torus_limit_j(1, TorusJMethod::Quadrature).unwrap().value;
    let series = torus_limit_j(1, TorusJMethod::Series).unwrap().value;
    let mut errors = Vec::new();
    for n in [64, 128, 256, 512] {
        let q = transition_matrix(&build_cycle(n).unwrap()).unwrap();
        errors.push((partial_loop_mass_rate(&q, n - 1).unwrap() - LN_2).abs());
    }
    let trend = errors.windows(2).all(|w| w[1] < w[0]);
    let last = *errors.last().unwrap();
    let pass = (quad - LN_2).abs() <= 1e-6 && (series - LN_2).abs() <= 1e-6 && trend && last < 0.02;
    report(
        3,
        pass,
        format!(
            "quadrature err {:e}, series err {:e}, proxy errors {errors:?} (need < 0.02 at n = 512)",
            (quad - LN_2).abs(),
            (series - LN_2).abs()
        ),
        start,
    );
    assert!(pass);
}

#[test]
fn criterion_04_tree_j() {
    let start = Instant::now();
    let expected = 0.5 * 1.5f64.ln();
    let closed = tree_ball_j(3).unwrap();
    let limit = tree_ball_limit_spectrum(3, 60).unwrap();
    let atomic = limit.atomic_j();
    let mass = limit.atomic_mass() + limit.tail_mass;
    let pass = (closed - expected).abs() <= 1e-12 && (atomic - expected).abs() <= 1e-6 && (mass - 1.0).abs() <= 1e-12;
    report(
        4,
        pass,
        format!("closed form {closed}, atomic {atomic}, atomic + tail mass - 1 = {:e}", mass - 1.0),
        start,
    );
    assert!(pass);
}

#[test]
fn criterion_05_phase_transition_point() {
    let start = Instant::now();
    let probs: Vec<f64> = [8, 10, 12]
        .iter()
        .map(|&n| {
            let c = KillingRate::from_exp_rate(LN_2, n).unwrap();
            exact_cover_probability(&build_cycle(n).unwrap(), c).unwrap().probability
        })
        .collect();
    let gaps: Vec<f64> = probs.iter().map(|p| (0.5 - p).abs()).collect();
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    let pass = monotone && gaps[2] < 0.1;
    report(5, pass, format!("P = {probs:?}, gap at n = 12 is {:.4} (need < 0.1)", gaps[2]), start);
    assert!(pass);
}

#[test]
fn criterion_06_poisson_soup_law() {
    let start = Instant::now();
    let g = build_cycle(4).unwrap();
    let c = KillingRate::new(0.05).unwrap();
    let alpha = 1.0;
    let soups = 10_000;
    let mean = alpha * exact_cover_probability(&g, c).unwrap().covered_mass;
    let counts = soup_cover_counts(&g, c, alpha, soups, 6).unwrap();

    // Poisson cells 0..=top with expected count >= 5, the last one holding the upper tail
    let nf = soups as f64;
    let mut pmf = vec![(-mean).exp()];
    while nf * pmf[pmf.len() - 1] * mean / pmf.len() as f64 >= 5.0 || pmf.len() as f64 <= mean {
        let k = pmf.len() as f64;
        pmf.push(pmf[pmf.len() - 1] * mean / k);
    }
    let top = pmf.len() - 1;
    let tail = 1.0 - pmf[..top].iter().sum::<f64>();
    pmf[top] = tail;
    let mut observed = vec![0.0; top + 1];
    for &k in &counts {
        observed[k.min(top)] += 1.0;
    }
    let stat: f64 = observed
        .iter()
        .zip(&pmf)
        .map(|(o, p)| (o - nf * p).powi(2) / (nf * p))
        .sum();
    let p_value = 1.0 - ChiSquared::new(top as f64).unwrap().cdf(stat);
    let pass = p_value > 0.01;
    report(
        6,
        pass,
        format!("Poisson mean {mean:.5}, {} cells, chi-square {stat:.3}, p = {p_value:.4}", top + 1),
        start,
    );
    assert!(pass);
}

#[test]
fn criterion_07_complete_graph_regimes() {
    let start = Instant::now();
    let n = 2000;
    let reps = 100_000;
    let estimate = |d: f64, seed: u64| {
        mc_complete_cover_prob(n, (n as f64).powf(-d), reps, seed).unwrap().point
    };
    let (p2, p4, p05) = (estimate(2.0, 71), estimate(4.0, 72), estimate(0.5, 73));
    let pass = (p2 - 0.5).abs() <= 0.03 && (p4 - 0.75).abs() <= 0.03 && p05 < 0.02;
    report(
        7,
        pass,
        format!("d=2: {p2:.4} (target 0.5), d=4: {p4:.4} (target 0.75), d=0.5: {p05:.4} (need < 0.02)"),
        start,
    );
    assert!(pass);
}

#[test]
fn criterion_08_gumbel_gamma() {
    let start = Instant::now();
    let beta = beta_regime_estimate(1.0, 100_000, 100_000, 81).unwrap();
    let cdf = normalized_cover_cdf(10_000, 0.0, 100_000, 82).unwrap();
    let e_inv = (-1f64).exp();
    let pass = (beta.estimate.mean - beta.predicted).abs() <= 0.05 && (cdf.point - e_inv).abs() <= 0.01;
    report(
        8,
        pass,
        format!(
            "E[exp(-normalized)] = {:.4} +- {:.4} vs {}, P[normalized <= 0] = {:.4} vs {e_inv:.4}",
            beta.estimate.mean, beta.estimate.std_error, beta.predicted, cdf.point
        ),
        start,
    );
    assert!(pass);
}

#[test]
fn criterion_09_bound_suite() {
    let start = Instant::now();
    let mut graphs: Vec<WeightedGraph> = Vec::new();
    graphs.extend([3, 5, 7, 9, 11].map(|n| build_cycle(n).unwrap()));
    graphs.extend((3..=12).map(|n| build_complete(n).unwrap()));
    graphs.push(build_torus(2, 3).unwrap());
    graphs.extend((2..=4).map(|n| build_cycle_with_chords(n).unwrap()));
    graphs.push(build_tree_ball(3, 2).unwrap());
    let mut rng = replicate_rng(909, 0);
    while graphs.len() < 100 {
        let m = rng.random_range(3..=12);
        let p = rng.random_range(0.05..0.6);
        let weights = if graphs.len() % 2 == 0 { (1.0, 1.0) } else { (0.5, 2.0) };
        graphs.push(random_connected(m, p, weights, &mut rng).unwrap());
    }

    let mut violations: Vec<String> = Vec::new();
    let mut checks = 0usize;
    for (i, g) in graphs.iter().enumerate() {
        let pi = stationary_distribution(g).unwrap();
        let q = transition_matrix(g).unwrap();
        let m = g.vertex_count();

        checks += 1;
        if !poincare_bound(g, &pi, &default_path_system(g).unwrap()).unwrap().holds {
            violations.push(format!("graph {i}: Poincare"));
        }
        if !g.is_bipartite() {
            checks += 1;
            if !odd_loop_bound(g, &pi, &default_odd_loop_system(g).unwrap()).unwrap().holds {
                violations.push(format!("graph {i}: odd loop"));
            }
        }
        for k in [2, 5, 10, 50, 200] {
            checks += 1;
            if !return_probability_bound_check(g, k).unwrap().holds {
                violations.push(format!("graph {i}: return probability at k = {k}"));
            }
        }
        if g.is_regular() && g.has_unit_weights() && !g.is_bipartite() {
            checks += 1;
            if !trace_tail_check(g, 2.5).unwrap().holds {
                violations.push(format!("graph {i}: trace tail"));
            }
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut rng);
        let keep = m - rng.random_range(1..=m.div_ceil(3));
        let subset = &order[..keep];
        for rho in [0.3, 0.6, 0.9] {
            checks += 1;
            let r = interlacing_bracket_check(&q, &pi, subset, rho).unwrap();
            if !(r.bracket_holds && r.interlacing_holds) {
                violations.push(format!("graph {i}: interlacing at rho = {rho}"));
            }
        }
    }
    for (n, lambda, gamma, reps) in [
        (100, 0.5, -2.0, 1_000_000),
        (10, 0.9, -3.0, 1_000_000),
        (100, 0.0, -2.0, 100_000),
        (1000, 0.3, -1.5, 100_000),
        (10, 0.6, -1.2, 1_000_000),
    ] {
        checks += 1;
        if !laplace_tail_bound_check(n, lambda, gamma, reps, 99).unwrap().holds {
            violations.push(format!("Laplace tail n = {n}, lambda = {lambda}, gamma = {gamma}"));
        }
    }
    let pass = violations.is_empty();
    report(
        9,
        pass,
        format!("{} graphs, {checks} checks, {} violations {violations:?}", graphs.len(), violations.len()),
        start,
    );
    assert!(pass);
}

#[test]
fn criterion_10_stability() {
    let start = Instant::now();
    let mut distances = Vec::new();
    let mut all_hold = true;
    let mut worst_ratio = 0.0f64;
    for n in [16, 32, 64] {
        let g = build_cycle_with_chords(n).unwrap();
        let a = (g.vertex_count() as f64).sqrt().ceil() as usize;
        let r = perturbation_report(&g, &chord_edges(n)[..a], &[0.3, 0.6, 0.9]).unwrap();
        for row in &r.rows {
            all_hold &= row.holds;
            worst_ratio = worst_ratio.max(row.delta.abs() / row.bound);
        }
        distances.push(r.kolmogorov);
    }
    let decreasing = distances.windows(2).all(|w| w[1] < w[0]);
    let pass = all_hold && decreasing;
    report(
        10,
        pass,
        format!("max |delta|/bound {worst_ratio:.4}, Kolmogorov distances {distances:?}"),
        start,
    );
    assert!(pass);
}
