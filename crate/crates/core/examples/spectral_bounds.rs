//! Poincare, odd-loop, return-probability, trace-tail and interlacing checks
//! on the cycle with chords; the trace-tail check runs on a torus since it
//! needs a regular graph.

use loopcover::graph::{build_cycle_with_chords, build_torus, stationary_distribution, transition_matrix};
use loopcover::spectral::{
    default_odd_loop_system, default_path_system, interlacing_bracket_check, odd_loop_bound, poincare_bound,
    return_probability_bound_check, trace_tail_check,
};

fn main() -> loopcover::Result<()> {
    let g = build_cycle_with_chords(4)?;
    let pi = stationary_distribution(&g)?;
    let q = transition_matrix(&g)?;

    let p = poincare_bound(&g, &pi, &default_path_system(&g)?)?;
    println!("second largest {:.6} <= {:.6} (kappa {:.3}): {}", p.second_largest, p.bound, p.kappa, p.holds);

    let o = odd_loop_bound(&g, &pi, &default_odd_loop_system(&g)?)?;
    println!("smallest {:.6} >= {:.6} (tau {:.3}): {}", o.smallest, o.bound, o.tau, o.holds);

    let r = return_probability_bound_check(&g, 20)?;
    println!("Tr Q^20 = {:.6} <= {:.6}: {}", r.trace, r.trace_bound, r.holds);

    let t = trace_tail_check(&build_torus(2, 5)?, 3.0)?;
    println!("2-torus trace tail max deviation {:.3e}: {}", t.max_deviation, t.holds);

    let subset: Vec<usize> = (2..g.vertex_count()).collect();
    let i = interlacing_bracket_check(&q, &pi, &subset, 0.6)?;
    println!(
        "log-det difference {:.6} in [{:.6}, {:.6}]: {} (interlacing {})",
        i.difference, i.bracket.0, i.bracket.1, i.bracket_holds, i.interlacing_holds
    );
    Ok(())
}
