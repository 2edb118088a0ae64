//! Covering-loop counts in Poisson loop soups on the 4-cycle against the
//! Poisson mean from the exact covered mass.

use loopcover::graph::build_cycle;
use loopcover::loops::{exact_cover_probability, sample_loop_soup, soup_cover_counts, KillingRate};

fn main() -> loopcover::Result<()> {
    let g = build_cycle(4)?;
    let c = KillingRate::new(0.1)?;
    let alpha = 2.0;
    let soup = sample_loop_soup(&g, c, alpha, 3)?;
    println!("one soup: {} loops, {} covering", soup.loops.len(), soup.covering_count(&g));

    let counts = soup_cover_counts(&g, c, alpha, 10_000, 3)?;
    let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    let expected = alpha * exact_cover_probability(&g, c)?.covered_mass;
    println!("mean covering count {mean:.4}, Poisson mean {expected:.4}");
    Ok(())
}
