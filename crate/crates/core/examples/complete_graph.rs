//! Cover time of the complete graph, its Gumbel limit and the regime sweep
//! over `c = n^-d`.

use loopcover::complete::{
    beta_regime_estimate, cover_time_mean, gumbel_cdf, normalized_cover_cdf, regime_sweep, regime_sweep_csv,
    sample_cover_time,
};
use loopcover::rng::replicate_rng;

fn main() -> loopcover::Result<()> {
    let s = sample_cover_time(1000, &mut replicate_rng(1, 0))?;
    println!("C(1000) = {} (mean {:.1})", s.value, cover_time_mean(1000));

    let cdf = normalized_cover_cdf(1000, 0.0, 20_000, 2)?;
    println!("P[normalized <= 0] = {:.4} +- {:.4}, Gumbel {:.4}", cdf.point, cdf.half_width, gumbel_cdf(0.0));

    let beta = beta_regime_estimate(0.5, 1000, 20_000, 3)?;
    println!(
        "E[exp(-0.5 normalized)] = {:.4} +- {:.4}, Gamma(1.5) = {:.4}",
        beta.estimate.mean, beta.estimate.std_error, beta.predicted
    );

    print!("{}", regime_sweep_csv(&regime_sweep(&[200, 2000], &[0.5, 2.0, 4.0], 5000, 4)?));
    Ok(())
}
