//! Deleting chords from the cycle with chords barely moves the spectrum.

use loopcover::graph::{build_cycle_with_chords, chord_edges};
use loopcover::spectral::perturbation_report;

fn main() -> loopcover::Result<()> {
    println!("n,removed,rho,delta,bound,kolmogorov");
    for n in [16, 32, 64, 128] {
        let g = build_cycle_with_chords(n)?;
        let a = (g.vertex_count() as f64).sqrt().ceil() as usize;
        let r = perturbation_report(&g, &chord_edges(n)[..a], &[0.3, 0.6, 0.9])?;
        for row in &r.rows {
            println!("{n},{a},{},{},{},{}", row.rho, row.delta, row.bound, r.kolmogorov);
        }
    }
    Ok(())
}
