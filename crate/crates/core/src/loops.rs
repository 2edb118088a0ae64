//! The pointed loop measure `mu(k, x_1..x_k) = (1/k) (1+c)^{-k} prod Q[x_i][x_{i+1}]`:
//! length law, bridge sampling, exact covering masses and loop soups.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Poisson;

use crate::error::{Error, Result};
use crate::graph::{transition_matrix, TransitionMatrix, WeightedGraph};
use crate::rng::{replicate_rng, CoverEstimate};
use crate::spectral::{reversible_measure, symmetric_decomposition};

/// Longest loop the bridge sampler will build.
pub const MAX_BRIDGE_LEN: usize = 1_000_000;

/// Largest vertex count accepted by the subset dynamic programs.
pub const MAX_DP_VERTICES: usize = 14;

/// Relative truncation tail accepted by the samplers.
pub const SAMPLER_TAIL_TOL: f64 = 1e-9;

/// Extra per-step killing `c > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KillingRate {
    c: f64,
}

impl KillingRate {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("killing rate must be positive and finite, got {c}")));
        }
        Ok(Self { c })
    }

    /// `c = exp(-a m)`.
    pub fn from_exp_rate(a: f64, m: usize) -> Result<Self> {
        Self::new((-a * m as f64).exp())
    }

    /// `c = n^{-d}`.
    pub fn from_power(d: f64, n: usize) -> Result<Self> {
        Self::new((n as f64).powf(-d))
    }

    /// `c = beta / n`.
    pub fn from_beta(beta: f64, n: usize) -> Result<Self> {
        Self::new(beta / n as f64)
    }

    pub fn value(&self) -> f64 {
        self.c
    }

    /// `rho = 1/(1+c)`.
    pub fn rho(&self) -> f64 {
        1.0 / (1.0 + self.c)
    }

    /// `ln rho`, accurate for tiny `c`.
    pub fn ln_rho(&self) -> f64 {
        -self.c.ln_1p()
    }

    /// `-ln(1 - rho) = ln(1+c) - ln c`.
    pub fn neg_ln_one_minus_rho(&self) -> f64 {
        self.c.ln_1p() - self.c.ln()
    }
}

/// Worst-case tail `m sum_{k>K} rho^k / k <= m rho^{K+1} / ((K+1)(1-rho))`.
pub fn tail_upper_bound(m: usize, c: KillingRate, max_len: usize) -> f64 {
    let k1 = (max_len + 1) as f64;
    m as f64 * (k1 * c.ln_rho()).exp() / k1 * (1.0 + c.value()) / c.value()
}

/// Smallest `K >= 2` whose worst-case tail is below `rel` times the mass of
/// length-2 loops (a lower bound on the in-range mass).
pub fn choose_truncation(q: &TransitionMatrix, c: KillingRate, rel: f64) -> usize {
    let m = q.size();
    let tr2: f64 = (0..m)
        .flat_map(|x| (0..m).map(move |y| (x, y)))
        .map(|(x, y)| q.get(x, y) * q.get(y, x))
        .sum();
    let floor = rel * tr2 / 2.0 * (2.0 * c.ln_rho()).exp();
    // m rho^{K+1} (1+c)/c <= floor, dropping the 1/(K+1) factor
    let needed = ((m as f64 * (1.0 + c.value()) / c.value()) / floor).ln() / c.value().ln_1p();
    (needed.ceil().max(3.0) as usize - 1).max(2)
}

fn support_is_bipartite(q: &TransitionMatrix) -> bool {
    let m = q.size();
    let mut color = vec![u8::MAX; m];
    for s in 0..m {
        if color[s] != u8::MAX {
            continue;
        }
        color[s] = 0;
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for y in 0..m {
                if q.get(x, y) > 0.0 {
                    if color[y] == u8::MAX {
                        color[y] = 1 - color[x];
                        stack.push(y);
                    } else if color[y] == color[x] {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// `mu(p(l) = k)` for `k = 2..=K`, with a bracket on the mass beyond `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopLengthDistribution {
    c: KillingRate,
    vertex_count: usize,
    masses: Vec<f64>,
    pub tail_lower: f64,
    pub tail_upper: f64,
}

impl LoopLengthDistribution {
    pub fn killing_rate(&self) -> KillingRate {
        self.c
    }

    pub fn max_len(&self) -> usize {
        self.masses.len() + 1
    }

    /// `mu(p(l) = k)`; zero outside `2..=K`.
    pub fn mass(&self, k: usize) -> f64 {
        if k < 2 {
            0.0
        } else {
            self.masses.get(k - 2).copied().unwrap_or(0.0)
        }
    }

    /// Masses for `k = 2..=K`.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass_in_range(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn tail_ratio(&self) -> f64 {
        self.tail_upper / self.mass_in_range()
    }

    /// CSV with header `k,mass`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,mass\n");
        for (i, w) in self.masses.iter().enumerate() {
            let _ = writeln!(s, "{},{w}", i + 2);
        }
        s
    }
}

/// Traces `Tr Q^k` for `k = 2..=K` as eigenvalue power sums. Odd traces of a
/// bipartite chain are exactly zero and are set so.
fn traces(q: &TransitionMatrix, max_len: usize) -> Result<Vec<f64>> {
    let pi = reversible_measure(q)?;
    let (values, _) = symmetric_decomposition(q, &pi)?;
    let bipartite = support_is_bipartite(q);
    let mut powers = values.clone();
    let mut out = Vec::with_capacity(max_len.saturating_sub(1));
    for k in 2..=max_len {
        let mut t = 0.0;
        for (p, &l) in powers.iter_mut().zip(&values) {
            *p *= l;
            t += *p;
        }
        out.push(if bipartite && k % 2 == 1 { 0.0 } else { t.max(0.0) });
    }
    Ok(out)
}

pub fn loop_length_distribution(
    q: &TransitionMatrix,
    c: KillingRate,
    max_len: usize,
) -> Result<LoopLengthDistribution> {
    if max_len < 2 {
        return Err(Error::InvalidArgument(format!("K must be >= 2, got {max_len}")));
    }
    if max_len > MAX_BRIDGE_LEN {
        return Err(Error::Infeasible(format!(
            "K = {max_len} exceeds the loop length cap {MAX_BRIDGE_LEN}"
        )));
    }
    let ln_rho = c.ln_rho();
    let masses = traces(q, max_len)?
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let k = (i + 2) as f64;
            t * (k * ln_rho).exp() / k
        })
        .collect();
    Ok(LoopLengthDistribution {
        c,
        vertex_count: q.size(),
        masses,
        tail_lower: 0.0,
        tail_upper: tail_upper_bound(q.size(), c, max_len),
    })
}

/// `(mass of lengths 2..=K, upper bound on the rest)`.
pub fn total_mass(q: &TransitionMatrix, c: KillingRate, max_len: usize) -> Result<(f64, f64)> {
    let d = loop_length_distribution(q, c, max_len)?;
    Ok((d.mass_in_range(), d.tail_upper))
}

/// Total mass over all lengths, `-sum_i ln(1 - rho lambda_i)`, with the Perron
/// term `-ln(1 - rho)` taken in closed form.
pub fn total_mass_exact(q: &TransitionMatrix, c: KillingRate) -> Result<f64> {
    let pi = reversible_measure(q)?;
    let (mut values, _) = symmetric_decomposition(q, &pi)?;
    values.sort_by(f64::total_cmp);
    values.pop();
    let rho = c.rho();
    Ok(c.neg_ln_one_minus_rho() - values.iter().map(|&l| (-rho * l).ln_1p()).sum::<f64>())
}

/// A pointed loop `(xi_1, ..., xi_k)`; the walk closes from `xi_k` back to `xi_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loop {
    pub vertices: Vec<usize>,
}

impl Loop {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn base(&self) -> usize {
        self.vertices[0]
    }
}

/// True iff the loop visits every vertex of `g`.
pub fn covers(l: &Loop, g: &WeightedGraph) -> bool {
    let mut seen = vec![false; g.vertex_count()];
    let mut count = 0;
    for &v in &l.vertices {
        if !std::mem::replace(&mut seen[v], true) {
            count += 1;
        }
    }
    count == g.vertex_count()
}

/// Precomputed state for drawing loops from `mu`.
#[derive(Debug, Clone)]
pub struct LoopSampler {
    rows: Vec<Vec<(usize, f64)>>,
    values: Vec<f64>,
    /// `U[x][i]^2` for the orthonormal eigenvectors of the symmetric conjugate.
    weights: DMatrix<f64>,
    bipartite: bool,
}

impl LoopSampler {
    pub fn new(q: &TransitionMatrix) -> Result<Self> {
        let m = q.size();
        let pi = reversible_measure(q)?;
        let (values, vectors) = symmetric_decomposition(q, &pi)?;
        let rows = (0..m)
            .map(|x| (0..m).filter(|&y| q.get(x, y) > 0.0).map(|y| (y, q.get(x, y))).collect())
            .collect();
        Ok(Self {
            rows,
            values,
            weights: vectors.map(|u| u * u),
            bipartite: support_is_bipartite(q),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.rows.len()
    }

    /// Diagonal of `Q^k`.
    pub fn return_weights(&self, k: usize) -> Vec<f64> {
        let m = self.vertex_count();
        if self.bipartite && k % 2 == 1 {
            return vec![0.0; m];
        }
        let powers: Vec<f64> = self.values.iter().map(|l| l.powi(k as i32)).collect();
        (0..m)
            .map(|x| {
                (0..m)
                    .map(|i| self.weights[(x, i)] * powers[i])
                    .sum::<f64>()
                    .max(0.0)
            })
            .collect()
    }

    /// A loop of length exactly `k`, from `mu` conditioned on `p(l) = k`.
    pub fn sample_with_length<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Loop> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("loop length must be >= 2, got {k}")));
        }
        if k > MAX_BRIDGE_LEN {
            return Err(Error::Infeasible(format!(
                "loop length {k} exceeds the bridge cap {MAX_BRIDGE_LEN}"
            )));
        }
        let diag = self.return_weights(k);
        let base = WeightedIndex::new(&diag)
            .map_err(|_| Error::InvalidArgument(format!("no loops of length {k}")))?
            .sample(rng);
        self.bridge(base, k, rng)
    }

    /// Walk from `base` conditioned to return after `k` steps.
    pub fn bridge<R: Rng + ?Sized>(&self, base: usize, k: usize, rng: &mut R) -> Result<Loop> {
        let m = self.vertex_count();
        // to_base[i][z] = (Q^i)[z][base]
        let mut to_base = Vec::with_capacity(k);
        let mut v = vec![0.0; m];
        v[base] = 1.0;
        to_base.push(v);
        for i in 1..k {
            let prev = &to_base[i - 1];
            let next: Vec<f64> = (0..m)
                .map(|z| self.rows[z].iter().map(|&(y, p)| p * prev[y]).sum())
                .collect();
            to_base.push(next);
        }
        let mut vertices = Vec::with_capacity(k);
        vertices.push(base);
        let mut y = base;
        for step in 0..k - 1 {
            let ahead = &to_base[k - step - 1];
            let options = &self.rows[y];
            let total: f64 = options.iter().map(|&(z, p)| p * ahead[z]).sum();
            if !(total > 0.0 && total.is_finite()) {
                return Err(Error::BridgeUnderflow { k, step });
            }
            let mut u = rng.random::<f64>() * total;
            let mut chosen = None;
            for &(z, p) in options {
                let w = p * ahead[z];
                if w > 0.0 {
                    chosen = Some(z);
                    if u < w {
                        break;
                    }
                    u -= w;
                }
            }
            y = chosen.ok_or(Error::BridgeUnderflow { k, step })?;
            vertices.push(y);
        }
        Ok(Loop { vertices })
    }

    /// A loop from `mu` restricted to lengths `2..=K` and normalized.
    pub fn sample<R: Rng + ?Sized>(&self, dist: &LengthSampler, rng: &mut R) -> Result<Loop> {
        let k = dist.index.sample(rng) + 2;
        self.sample_with_length(k, rng)
    }
}

/// Categorical draw of the loop length from a `LoopLengthDistribution`.
#[derive(Debug, Clone)]
pub struct LengthSampler {
    index: WeightedIndex<f64>,
}

impl LengthSampler {
    pub fn new(dist: &LoopLengthDistribution) -> Result<Self> {
        let index = WeightedIndex::new(dist.masses())
            .map_err(|e| Error::InvalidArgument(format!("loop length masses: {e}")))?;
        Ok(Self { index })
    }
}

/// One loop from `mu` normalized on lengths `2..=K`. Refuses a distribution
/// whose truncated tail exceeds `1e-9` of its mass; use
/// [`sample_loop_truncated`] to accept the truncation explicitly.
pub fn sample_loop<R: Rng + ?Sized>(
    q: &TransitionMatrix,
    dist: &LoopLengthDistribution,
    rng: &mut R,
) -> Result<Loop> {
    let ratio = dist.tail_ratio();
    if ratio > SAMPLER_TAIL_TOL {
        return Err(Error::TruncationTail {
            ratio,
            limit: SAMPLER_TAIL_TOL,
        });
    }
    sample_loop_truncated(q, dist, rng)
}

pub fn sample_loop_truncated<R: Rng + ?Sized>(
    q: &TransitionMatrix,
    dist: &LoopLengthDistribution,
    rng: &mut R,
) -> Result<Loop> {
    LoopSampler::new(q)?.sample(&LengthSampler::new(dist)?, rng)
}

fn check_dp_size(m: usize) -> Result<()> {
    if m > MAX_DP_VERTICES {
        return Err(Error::Infeasible(format!(
            "subset dynamic program needs at most {MAX_DP_VERTICES} vertices, got {m}"
        )));
    }
    if m < 2 {
        return Err(Error::InvalidArgument("graph needs at least two vertices".into()));
    }
    Ok(())
}

fn sparse_rows(q: &TransitionMatrix) -> Vec<Vec<(usize, f64)>> {
    let m = q.size();
    (0..m)
        .map(|x| (0..m).filter(|&y| q.get(x, y) > 0.0).map(|y| (y, q.get(x, y))).collect())
        .collect()
}

/// Walk probabilities indexed by `(visited subset, current vertex)`.
struct SubsetWalk<'a> {
    m: usize,
    rows: &'a [Vec<(usize, f64)>],
    state: Vec<f64>,
    next: Vec<f64>,
    drop_full: bool,
}

impl<'a> SubsetWalk<'a> {
    fn new(rows: &'a [Vec<(usize, f64)>], drop_full: bool) -> Self {
        let m = rows.len();
        let size = (1usize << m) * m;
        Self {
            m,
            rows,
            state: vec![0.0; size],
            next: vec![0.0; size],
            drop_full,
        }
    }

    fn start_at(&mut self, x: usize, weight: f64) {
        self.state[(1usize << x) * self.m + x] += weight;
    }

    fn at(&self, mask: usize, v: usize) -> f64 {
        self.state[mask * self.m + v]
    }

    fn step(&mut self) {
        let m = self.m;
        let full = (1usize << m) - 1;
        self.next.iter_mut().for_each(|v| *v = 0.0);
        for mask in 1..=full {
            let row = &self.state[mask * m..(mask + 1) * m];
            for (v, &f) in row.iter().enumerate() {
                if f == 0.0 {
                    continue;
                }
                for &(y, p) in &self.rows[v] {
                    let to = mask | (1 << y);
                    if self.drop_full && to == full {
                        continue;
                    }
                    self.next[to * m + y] += f * p;
                }
            }
        }
        std::mem::swap(&mut self.state, &mut self.next);
    }

    fn live_mass(&self) -> f64 {
        self.state.iter().sum()
    }
}

/// Per-length covering and total loop masses for `k = 2..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverMassTable {
    /// `mu(C, p(l) = k)` at index `k - 2`.
    pub covered: Vec<f64>,
    /// `mu(p(l) = k)` at index `k - 2`, from the same dynamic program.
    pub total: Vec<f64>,
    pub tail_upper: f64,
}

impl CoverMassTable {
    pub fn max_len(&self) -> usize {
        self.covered.len() + 1
    }

    pub fn covered_mass(&self) -> f64 {
        self.covered.iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.total.iter().sum()
    }

    /// `P(C | p(l) = k)` at index `k - 2`; zero where no loop of length `k` exists.
    pub fn conditional(&self) -> Vec<f64> {
        self.covered
            .iter()
            .zip(&self.total)
            .map(|(&c, &t)| if t > 0.0 { (c / t).min(1.0) } else { 0.0 })
            .collect()
    }
}

/// Exact `mu(C, p(l) = k) = (1/k) rho^k sum_x P^x[X_k = x, all vertices visited]`
/// for `k = 2..=K` by dynamic programming over `(visited subset, current vertex)`,
/// run once per base point.
pub fn exact_cover_mass_dp(g: &WeightedGraph, c: KillingRate, max_len: usize) -> Result<CoverMassTable> {
    let m = g.vertex_count();
    check_dp_size(m)?;
    if max_len < 2 {
        return Err(Error::InvalidArgument(format!("K must be >= 2, got {max_len}")));
    }
    let q = transition_matrix(g)?;
    let rows = sparse_rows(&q);
    let full = (1usize << m) - 1;
    let mut covered = vec![0.0; max_len - 1];
    let mut total = vec![0.0; max_len - 1];
    let mut walk = SubsetWalk::new(&rows, false);
    for x in 0..m {
        walk.state.iter_mut().for_each(|v| *v = 0.0);
        walk.start_at(x, 1.0);
        for k in 1..=max_len {
            walk.step();
            if k < 2 {
                continue;
            }
            covered[k - 2] += walk.at(full, x);
            total[k - 2] += (0..=full).filter(|s| s >> x & 1 == 1).map(|s| walk.at(s, x)).sum::<f64>();
        }
    }
    let ln_rho = c.ln_rho();
    for k in 2..=max_len {
        let w = (k as f64 * ln_rho).exp() / k as f64;
        covered[k - 2] *= w;
        total[k - 2] *= w;
    }
    Ok(CoverMassTable {
        covered,
        total,
        tail_upper: tail_upper_bound(m, c, max_len),
    })
}

/// `P(C)` over loops of every length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactCover {
    pub covered_mass: f64,
    pub total_mass: f64,
    pub probability: f64,
    /// Steps run by the uncovered-mass dynamic program.
    pub steps: usize,
}

const UNCOVERED_REL_TOL: f64 = 1e-18;
const UNCOVERED_MAX_STEPS: usize = 10_000_000;

/// Exact covering probability over all loop lengths: the total mass in closed
/// form minus the mass of loops that miss a vertex. The latter is summed by the
/// subset dynamic program restricted to non-full subsets, which decays
/// geometrically, until a step adds less than `1e-18` of the running total.
pub fn exact_cover_probability(g: &WeightedGraph, c: KillingRate) -> Result<ExactCover> {
    let m = g.vertex_count();
    check_dp_size(m)?;
    let q = transition_matrix(g)?;
    let total_mass = total_mass_exact(&q, c)?;
    let rows = sparse_rows(&q);
    let ln_rho = c.ln_rho();
    let mut walk = SubsetWalk::new(&rows, true);
    let mut uncovered = 0.0;
    let mut steps = 0;
    for x in 0..m {
        walk.state.iter_mut().for_each(|v| *v = 0.0);
        walk.start_at(x, 1.0);
        let mut acc = 0.0;
        for k in 1.. {
            if k > UNCOVERED_MAX_STEPS {
                return Err(Error::Infeasible(format!(
                    "uncovered-mass recursion did not settle within {UNCOVERED_MAX_STEPS} steps"
                )));
            }
            walk.step();
            let w = (k as f64 * ln_rho).exp() / k as f64;
            let closed: f64 = (0..(1usize << m))
                .filter(|s| s >> x & 1 == 1)
                .map(|s| walk.at(s, x))
                .sum();
            acc += w * closed;
            // the live mass bounds every later closed term
            let live = w * walk.live_mass();
            if live <= UNCOVERED_REL_TOL * acc || live == 0.0 {
                steps = steps.max(k);
                break;
            }
        }
        uncovered += acc;
    }
    let covered_mass = (total_mass - uncovered).max(0.0);
    Ok(ExactCover {
        covered_mass,
        total_mass,
        probability: covered_mass / total_mass,
        steps,
    })
}

/// Covering mass by inclusion-exclusion over vertex subsets:
/// `mu(C) = -sum_S (-1)^{m-|S|} ln det(I - rho Q_S)`.
pub fn inclusion_exclusion_cover_mass(g: &WeightedGraph, c: KillingRate) -> Result<f64> {
    let m = g.vertex_count();
    check_dp_size(m)?;
    let q = transition_matrix(g)?;
    let rho = c.rho();
    let full = (1usize << m) - 1;
    let mut total = 0.0;
    for mask in 1..=full {
        let subset: Vec<usize> = (0..m).filter(|v| mask >> v & 1 == 1).collect();
        let log_det = if mask == full {
            -total_mass_exact(&q, c)?
        } else {
            let n = subset.len();
            (DMatrix::identity(n, n) - q.principal(&subset) * rho).lu().determinant().ln()
        };
        let sign = if (m - subset.len()) % 2 == 0 { -1.0 } else { 1.0 };
        total += sign * log_det;
    }
    Ok(total)
}

/// Probability that `(X_1, ..., X_k)` visits every vertex, for the walk started
/// from the uniform distribution.
pub fn free_walk_cover_probability(g: &WeightedGraph, k: usize) -> Result<f64> {
    let m = g.vertex_count();
    check_dp_size(m)?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let q = transition_matrix(g)?;
    let rows = sparse_rows(&q);
    let mut walk = SubsetWalk::new(&rows, false);
    for x in 0..m {
        walk.start_at(x, 1.0 / m as f64);
    }
    for _ in 1..k {
        walk.step();
    }
    let full = (1usize << m) - 1;
    Ok((0..m).map(|v| walk.at(full, v)).sum())
}

fn check_budget(budget: u64) -> Result<()> {
    if budget < 100 {
        return Err(Error::InvalidArgument(format!("budget must be >= 100, got {budget}")));
    }
    Ok(())
}

/// Truncated length law with the automatic `K`, refusing lengths past the bridge cap.
pub fn auto_length_distribution(q: &TransitionMatrix, c: KillingRate) -> Result<LoopLengthDistribution> {
    let k = choose_truncation(q, c, SAMPLER_TAIL_TOL);
    if k > MAX_BRIDGE_LEN {
        let ratio = tail_upper_bound(q.size(), c, MAX_BRIDGE_LEN);
        return Err(Error::TruncationTail {
            ratio,
            limit: SAMPLER_TAIL_TOL,
        });
    }
    let dist = loop_length_distribution(q, c, k)?;
    if dist.tail_ratio() > SAMPLER_TAIL_TOL {
        return Err(Error::TruncationTail {
            ratio: dist.tail_ratio(),
            limit: SAMPLER_TAIL_TOL,
        });
    }
    Ok(dist)
}

/// Monte-Carlo `P(C)`: the fraction of `budget` loops from normalized `mu` that cover.
pub fn mc_cover_prob(g: &WeightedGraph, c: KillingRate, budget: u64, seed: u64) -> Result<CoverEstimate> {
    check_budget(budget)?;
    let q = transition_matrix(g)?;
    let dist = auto_length_distribution(&q, c)?;
    let sampler = LoopSampler::new(&q)?;
    let lengths = LengthSampler::new(&dist)?;
    let mut hits = 0;
    for r in 0..budget {
        let mut rng = replicate_rng(seed, r);
        if covers(&sampler.sample(&lengths, &mut rng)?, g) {
            hits += 1;
        }
    }
    Ok(CoverEstimate::from_hits(hits, budget, seed).with_truncation(dist.max_len(), dist.tail_upper))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalCoverPoint {
    pub k: usize,
    pub estimate: CoverEstimate,
    /// `1 - d m (m-1) / k`, for regular unit-weight graphs.
    pub markov_lower_bound: Option<f64>,
}

/// `P(C | p(l) = k)` for each `k`, by bridge sampling. The replicates for the
/// `i`-th length use streams `i * reps .. (i+1) * reps`.
pub fn conditional_cover_curve(
    g: &WeightedGraph,
    ks: &[usize],
    reps: u64,
    seed: u64,
) -> Result<Vec<ConditionalCoverPoint>> {
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be >= 1".into()));
    }
    let q = transition_matrix(g)?;
    let sampler = LoopSampler::new(&q)?;
    let m = g.vertex_count() as f64;
    let regular = g.is_regular() && g.has_unit_weights();
    let mut out = Vec::with_capacity(ks.len());
    for (i, &k) in ks.iter().enumerate() {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("loop length must be >= 2, got {k}")));
        }
        let mut hits = 0;
        for r in 0..reps {
            let mut rng = replicate_rng(seed, i as u64 * reps + r);
            if covers(&sampler.sample_with_length(k, &mut rng)?, g) {
                hits += 1;
            }
        }
        let markov_lower_bound = regular.then(|| {
            let d = g.degree(0) as f64;
            1.0 - d * m * (m - 1.0) / k as f64
        });
        out.push(ConditionalCoverPoint {
            k,
            estimate: CoverEstimate::from_hits(hits, reps, seed),
            markov_lower_bound,
        });
    }
    Ok(out)
}

/// A Poisson collection of loops with intensity `alpha mu` on lengths `2..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopSoupSample {
    pub loops: Vec<Loop>,
    pub intensity: f64,
    /// Loop mass on lengths `2..=K`; the count has mean `intensity * total_mass_used`.
    pub total_mass_used: f64,
    /// Upper bound on the mass beyond `K`, left out of the soup.
    pub tail_upper: f64,
}

impl LoopSoupSample {
    pub fn covering_count(&self, g: &WeightedGraph) -> usize {
        self.loops.iter().filter(|l| covers(l, g)).count()
    }
}

/// Reusable state for drawing many soups on one graph.
#[derive(Debug, Clone)]
pub struct SoupSampler {
    sampler: LoopSampler,
    lengths: LengthSampler,
    dist: LoopLengthDistribution,
    alpha: f64,
    count: Poisson<f64>,
}

impl SoupSampler {
    pub fn new(g: &WeightedGraph, c: KillingRate, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("intensity must be positive, got {alpha}")));
        }
        let q = transition_matrix(g)?;
        let dist = auto_length_distribution(&q, c)?;
        let count = Poisson::new(alpha * dist.mass_in_range())
            .map_err(|e| Error::InvalidArgument(format!("soup intensity: {e}")))?;
        Ok(Self {
            sampler: LoopSampler::new(&q)?,
            lengths: LengthSampler::new(&dist)?,
            dist,
            alpha,
            count,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LoopSoupSample> {
        let n = self.count.sample(rng) as usize;
        let loops = (0..n)
            .map(|_| self.sampler.sample(&self.lengths, rng))
            .collect::<Result<_>>()?;
        Ok(LoopSoupSample {
            loops,
            intensity: self.alpha,
            total_mass_used: self.dist.mass_in_range(),
            tail_upper: self.dist.tail_upper,
        })
    }
}

pub fn sample_loop_soup(g: &WeightedGraph, c: KillingRate, alpha: f64, seed: u64) -> Result<LoopSoupSample> {
    SoupSampler::new(g, c, alpha)?.sample(&mut replicate_rng(seed, 0))
}

/// Covering-loop counts of `soups` independent soups, soup `r` on stream `r`.
pub fn soup_cover_counts(
    g: &WeightedGraph,
    c: KillingRate,
    alpha: f64,
    soups: u64,
    seed: u64,
) -> Result<Vec<usize>> {
    let sampler = SoupSampler::new(g, c, alpha)?;
    (0..soups)
        .map(|r| Ok(sampler.sample(&mut replicate_rng(seed, r))?.covering_count(g)))
        .collect()
}
