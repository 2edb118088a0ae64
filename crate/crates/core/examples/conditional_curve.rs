//! Covering probability of loops of fixed length, with the Markov lower bound.

use loopcover::graph::build_cycle;
use loopcover::loops::conditional_cover_curve;

fn main() -> loopcover::Result<()> {
    let g = build_cycle(10)?;
    let ks = [10, 20, 50, 100, 200, 500, 1000, 2000];
    println!("k,estimate,half_width,markov_lower_bound");
    for p in conditional_cover_curve(&g, &ks, 4000, 7)? {
        let bound = p.markov_lower_bound.map_or(String::new(), |b| b.to_string());
        println!("{},{},{},{}", p.k, p.estimate.point, p.estimate.half_width, bound);
    }
    Ok(())
}
