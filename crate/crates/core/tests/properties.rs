//! Invariants over random connected weighted graphs.

use loopcover::complete::{eta_pmf, ModifiedGeometric};
use loopcover::graph::{random_connected, stationary_distribution, transition_matrix, WeightedGraph};
use loopcover::loops::{exact_cover_mass_dp, KillingRate};
use loopcover::spectral::{
    default_odd_loop_system, default_path_system, graph_spectrum, interlacing_bracket_check,
    log_det_functional, log_det_series, matrix_power_trace, odd_loop_bound, poincare_bound,
    trace_power,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph(m: usize, p: f64, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_connected(m, p, (0.5, 2.0), &mut rng).unwrap()
}

fn arb_graph(max_m: usize) -> impl Strategy<Value = WeightedGraph> {
    (3..=max_m, 0.0..0.7f64, any::<u64>()).prop_map(|(m, p, s)| graph(m, p, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn builder_is_symmetric_without_self_loops(g in arb_graph(12)) {
        prop_assert!(g.is_connected());
        for x in 0..g.vertex_count() {
            prop_assert!(!g.has_edge(x, x));
            for &(y, w) in g.neighbors(x) {
                prop_assert_eq!(g.weight(y, x), Some(w));
            }
        }
    }

    #[test]
    fn transition_rows_sum_to_one(g in arb_graph(12)) {
        let q = transition_matrix(&g).unwrap();
        for x in 0..q.size() {
            prop_assert_eq!(q.get(x, x), 0.0);
            let row: f64 = (0..q.size()).map(|y| q.get(x, y)).sum();
            prop_assert!((row - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn detailed_balance(g in arb_graph(12)) {
        let q = transition_matrix(&g).unwrap();
        let pi = stationary_distribution(&g).unwrap();
        for &(x, y, _) in g.edges() {
            prop_assert!((pi.flow(&q, x, y) - pi.flow(&q, y, x)).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_lies_in_unit_interval(g in arb_graph(12)) {
        let s = graph_spectrum(&g).unwrap();
        let top = s.eigenvalues().iter().copied().fold(f64::MIN, f64::max);
        prop_assert!((top - 1.0).abs() < 1e-10);
        prop_assert!(s.eigenvalues().iter().all(|&l| (-1.0 - 1e-10..=1.0 + 1e-10).contains(&l)));
    }

    #[test]
    fn eigen_trace_matches_matrix_power(g in arb_graph(12), k in 1u32..12) {
        let q = transition_matrix(&g).unwrap();
        let a = trace_power(&q, k).unwrap();
        let b = matrix_power_trace(&q, k);
        prop_assert!((a - b).abs() < 1e-9 * g.vertex_count() as f64, "{} vs {}", a, b);
    }

    #[test]
    fn log_det_matches_series(g in arb_graph(10), rho in 0.05..0.9f64) {
        let q = transition_matrix(&g).unwrap();
        let a = log_det_functional(&q, rho).unwrap();
        let b = log_det_series(&q, rho, 1e-13).unwrap();
        prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
    }

    #[test]
    fn poincare_bound_holds(g in arb_graph(10)) {
        let pi = stationary_distribution(&g).unwrap();
        let paths = default_path_system(&g).unwrap();
        let r = poincare_bound(&g, &pi, &paths).unwrap();
        prop_assert!(r.holds, "{:?}", r);
    }

    #[test]
    fn odd_loop_bound_holds(g in arb_graph(10)) {
        prop_assume!(!g.is_bipartite());
        let pi = stationary_distribution(&g).unwrap();
        let loops = default_odd_loop_system(&g).unwrap();
        let r = odd_loop_bound(&g, &pi, &loops).unwrap();
        prop_assert!(r.holds, "{:?}", r);
    }

    #[test]
    fn interlacing_and_bracket(
        g in arb_graph(10),
        mask in any::<u16>(),
        rho in 0.05..0.95f64,
    ) {
        let m = g.vertex_count();
        let subset: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        prop_assume!(!subset.is_empty());
        let q = transition_matrix(&g).unwrap();
        let pi = stationary_distribution(&g).unwrap();
        let r = interlacing_bracket_check(&q, &pi, &subset, rho).unwrap();
        prop_assert!(r.interlacing_holds);
        prop_assert!(r.bracket_holds, "{:?}", r);
    }

    #[test]
    fn cover_conditionals_are_probabilities(g in arb_graph(7), c in 0.01..2.0f64) {
        let m = g.vertex_count();
        let t = exact_cover_mass_dp(&g, KillingRate::new(c).unwrap(), 3 * m).unwrap();
        for (i, &p) in t.conditional().iter().enumerate() {
            prop_assert!((0.0..=1.0).contains(&p));
            if i + 2 < m {
                prop_assert_eq!(t.covered[i], 0.0);
            }
        }
        prop_assert!(t.covered_mass() <= t.total_mass() * (1.0 + 1e-12));
    }

    #[test]
    fn edge_list_round_trip(g in arb_graph(12)) {
        let back = WeightedGraph::from_edge_list(&g.to_edge_list()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn eta_pmf_is_decreasing(c in 1e-8..10.0f64, p in 2u64..10_000) {
        let mg = ModifiedGeometric::new(c).unwrap();
        let a = eta_pmf(&mg, p).unwrap();
        let b = eta_pmf(&mg, p + 1).unwrap();
        prop_assert!(a > 0.0 || b == 0.0);
        prop_assert!(b <= a);
    }
}
