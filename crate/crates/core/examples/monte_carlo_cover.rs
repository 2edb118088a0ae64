//! Monte-Carlo covering probability with loops drawn by bridge sampling,
//! printed as an estimate record next to the exact value.

use loopcover::graph::build_torus;
use loopcover::loops::{exact_cover_probability, mc_cover_prob, KillingRate};

fn main() -> loopcover::Result<()> {
    let g = build_torus(2, 3)?;
    let c = KillingRate::new(0.01)?;
    let e = mc_cover_prob(&g, c, 20_000, 42)?;
    println!("{}", serde_json::to_string_pretty(&e.to_json())?);
    println!("exact: {}", exact_cover_probability(&g, c)?.probability);
    Ok(())
}
