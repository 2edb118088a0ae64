//! Atomic limit spectrum of balls in the 3-regular tree, with the covering
//! functional from the atoms and in closed form.

use loopcover::graph::build_tree_ball;
use loopcover::limits::{empirical_j, leaf_chain_j, leaf_chain_limit_spectrum, tree_ball_j, tree_ball_limit_spectrum};
use loopcover::spectral::{graph_spectrum, kolmogorov_distance};

fn main() -> loopcover::Result<()> {
    let limit = tree_ball_limit_spectrum(3, 60)?;
    print!("{}", limit.to_csv());
    println!("atomic J {:.9}, closed form {:.9}", limit.atomic_j(), tree_ball_j(3)?);

    let chain = leaf_chain_limit_spectrum(3, 60)?;
    println!("leaf-chain J {:.9}", leaf_chain_j(3)?);
    for radius in 4..=8 {
        let s = graph_spectrum(&build_tree_ball(3, radius)?)?;
        let d = kolmogorov_distance(&s.esd().atoms(), &chain.atom_pairs(), 1e-7);
        println!("radius {radius}: empirical J {:.6}, distance to leaf-chain limit {d:.5}", empirical_j(&s));
    }
    Ok(())
}
