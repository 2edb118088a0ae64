//! Loop mass by length on the 8-cycle and the closed-form total.

use loopcover::graph::{build_cycle, transition_matrix};
use loopcover::loops::{loop_length_distribution, total_mass_exact, KillingRate};

fn main() -> loopcover::Result<()> {
    let q = transition_matrix(&build_cycle(8)?)?;
    let c = KillingRate::new(0.05)?;
    let dist = loop_length_distribution(&q, c, 40)?;
    print!("{}", dist.to_csv());
    println!(
        "mass on 2..=40: {}, tail in [{:e}, {:e}], total {}",
        dist.mass_in_range(),
        dist.tail_lower,
        dist.tail_upper,
        total_mass_exact(&q, c)?
    );
    Ok(())
}
