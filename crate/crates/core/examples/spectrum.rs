//! Spectrum and empirical spectral distribution of the walk on a tree ball.

use loopcover::graph::build_tree_ball;
use loopcover::limits::empirical_j;
use loopcover::spectral::graph_spectrum;

fn main() -> loopcover::Result<()> {
    let g = build_tree_ball(3, 3)?;
    let s = graph_spectrum(&g)?;
    print!("{}", s.to_csv());
    print!("{}", s.esd().to_csv());
    println!("log-det functional at rho=0.5: {}", s.log_det_functional(0.5)?);
    println!("J of the finite ball: {}", empirical_j(&s));
    Ok(())
}
