//! The covering functional of the torus by quadrature, series and QMC, and
//! finite tori approaching it.

use loopcover::graph::build_torus;
use loopcover::limits::{empirical_j, torus_limit_j, torus_limit_j_qmc, TorusJMethod};
use loopcover::spectral::graph_spectrum;

fn main() -> loopcover::Result<()> {
    for dim in 1..=3 {
        let quad = torus_limit_j(dim, TorusJMethod::Quadrature)?;
        let qmc = torus_limit_j_qmc(dim, 1 << 14, 16, 5)?;
        print!("dim {dim}: quadrature {:.10} (+-{:.1e}), qmc {:.6} (+-{:.1e})", quad.value, quad.error, qmc.value, qmc.error);
        if dim <= 2 {
            let series = torus_limit_j(dim, TorusJMethod::Series)?;
            print!(", series {:.10}", series.value);
        }
        println!();
    }
    for side in [4, 8, 16, 32] {
        let j = empirical_j(&graph_spectrum(&build_torus(2, side)?)?);
        println!("2-torus side {side}: {j:.6}");
    }
    Ok(())
}
