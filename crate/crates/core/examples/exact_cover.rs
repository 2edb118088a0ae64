//! Exact covering probability on small cycles by the subset dynamic program,
//! cross-checked by inclusion-exclusion over vertex subsets.

use loopcover::graph::build_cycle;
use loopcover::loops::{exact_cover_probability, inclusion_exclusion_cover_mass, KillingRate};

fn main() -> loopcover::Result<()> {
    println!("n,c,covered_mass,inclusion_exclusion,probability");
    for n in [4, 6, 8, 10, 12] {
        let g = build_cycle(n)?;
        let c = KillingRate::from_exp_rate(std::f64::consts::LN_2, n)?;
        let exact = exact_cover_probability(&g, c)?;
        let ie = inclusion_exclusion_cover_mass(&g, c)?;
        println!("{n},{},{},{},{}", c.value(), exact.covered_mass, ie, exact.probability);
    }
    Ok(())
}
