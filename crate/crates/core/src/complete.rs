//! Covering on the complete graph: cover time as a sum of geometric variables,
//! the log-series loop length `eta`, and the Gumbel limit.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::limits::complete_predicted_limit;
use crate::loops::KillingRate;
use crate::rng::{replicate_rng, CoverEstimate};

/// `C^{(n)}` and `(C - n ln n) / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverTimeSample {
    pub n: usize,
    pub value: u64,
    pub normalized: f64,
}

/// Draws `C^{(n)} = sum_{i=1}^{n-1} Geom((n-i)/(n-1))` on `{1, 2, ...}`.
///
/// Each geometric is `floor(E / -ln q) + 1` with `E` standard exponential, which
/// has `P(value > k) = P(E >= -k ln q) = q^k`. The truncating cast avoids a
/// `ceil` call in the hot loop.
#[derive(Debug, Clone)]
pub struct CoverTimeSampler {
    n: usize,
    /// `1 / -ln q_i` for the steps with `q_i > 0`.
    scales: Vec<f64>,
}

impl CoverTimeSampler {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("n must be >= 2, got {n}")));
        }
        let nm1 = (n - 1) as f64;
        // q_i = (i-1)/(n-1); i = 1 has q = 0 and always takes one step
        let scales = (2..n).map(|i| -1.0 / ((i - 1) as f64 / nm1).ln()).collect();
        Ok(Self { n, scales })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CoverTimeSample {
        let mut total = 1u64;
        for &s in &self.scales {
            let e: f64 = Exp1.sample(rng);
            total += (e * s) as u64 + 1;
        }
        let nf = self.n as f64;
        CoverTimeSample {
            n: self.n,
            value: total,
            normalized: (total as f64 - nf * nf.ln()) / nf,
        }
    }
}

pub fn sample_cover_time<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CoverTimeSample> {
    Ok(CoverTimeSampler::new(n)?.sample(rng))
}

/// `E[C^{(n)}] = (n-1) H_{n-1}`.
pub fn cover_time_mean(n: usize) -> f64 {
    let h: f64 = (1..n).map(|i| 1.0 / i as f64).sum();
    (n - 1) as f64 * h
}

/// `Var[C^{(n)}] = sum_i q_i / p_i^2`.
pub fn cover_time_variance(n: usize) -> f64 {
    let nm1 = (n - 1) as f64;
    (1..n)
        .map(|i| {
            let p = (n - i) as f64 / nm1;
            (1.0 - p) / (p * p)
        })
        .sum()
}

/// Log-series law `P(eta = p) = (1/p) (1+c)^{-p} / Z` on `p >= 2`, with
/// `Z = -ln c + ln(1+c) - (1+c)^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModifiedGeometric {
    c: KillingRate,
    z: f64,
    /// `ln(1 - x)` for `x = 1/(1+c)`.
    ln_one_minus_x: f64,
}

impl ModifiedGeometric {
    pub fn new(c: f64) -> Result<Self> {
        let c = KillingRate::new(c)?;
        Ok(Self {
            c,
            z: c.neg_ln_one_minus_rho() - c.rho(),
            ln_one_minus_x: -c.neg_ln_one_minus_rho(),
        })
    }

    pub fn c(&self) -> f64 {
        self.c.value()
    }

    pub fn normalization(&self) -> f64 {
        self.z
    }

    /// `P(eta > p)` bounded by `x^{p+1} / ((p+1)(1-x) Z)`.
    pub fn tail_bound(&self, p: u64) -> f64 {
        let k = (p + 1) as f64;
        (k * self.c.ln_rho()).exp() / (k * (1.0 - self.c.rho()) * self.z)
    }

    /// `E[eta] = (x/(1-x) - x) / Z`.
    pub fn mean(&self) -> f64 {
        (1.0 / self.c.value() - self.c.rho()) / self.z
    }
}

pub fn eta_pmf(mg: &ModifiedGeometric, p: u64) -> Result<f64> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("eta lives on p >= 2, got {p}")));
    }
    let pf = p as f64;
    Ok((pf * mg.c.ln_rho()).exp() / (pf * mg.z))
}

/// Kemp's inversion for the log-series law on `x = 1/(1+c)`, redrawn until the
/// value is at least 2. Values beyond `u64::MAX` saturate.
pub fn sample_eta<R: Rng + ?Sized>(mg: &ModifiedGeometric, rng: &mut R) -> u64 {
    let x = mg.c.rho();
    let r = mg.ln_one_minus_x;
    loop {
        let v: f64 = rng.random();
        if v >= x {
            continue;
        }
        let u: f64 = rng.random();
        let q = -(r * u).exp_m1();
        if v <= q * q {
            // q sits within an ulp of 1 once c is tiny; take ln q from e^{r u} itself
            let ln_q = (-(r * u).exp()).ln_1p();
            let value = (1.0 + v.ln() / ln_q).floor();
            if value >= 2.0 {
                return if value >= u64::MAX as f64 { u64::MAX } else { value as u64 };
            }
            continue;
        }
        if v >= q {
            continue;
        }
        return 2;
    }
}

fn check_reps(reps: u64) -> Result<()> {
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be >= 1".into()));
    }
    Ok(())
}

/// Monte-Carlo `P(C^{(n)} <= eta)` with independent draws.
pub fn mc_complete_cover_prob(n: usize, c: f64, reps: u64, seed: u64) -> Result<CoverEstimate> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("n must be >= 3, got {n}")));
    }
    check_reps(reps)?;
    let cover = CoverTimeSampler::new(n)?;
    let eta = ModifiedGeometric::new(c)?;
    let mut hits = 0;
    for r in 0..reps {
        let mut rng = replicate_rng(seed, r);
        let time = cover.sample(&mut rng).value;
        if time <= sample_eta(&eta, &mut rng) {
            hits += 1;
        }
    }
    Ok(CoverEstimate::from_hits(hits, reps, seed))
}

/// `e^{-e^{-t}}`.
pub fn gumbel_cdf(t: f64) -> f64 {
    (-(-t).exp()).exp()
}

/// `E[e^{-beta xi}] = Gamma(1 + beta)` for a standard Gumbel `xi`.
pub fn gumbel_exp_moment(beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    Ok(gamma(1.0 + beta))
}

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicates: u64,
}

impl MeanEstimate {
    fn from_values(values: impl Iterator<Item = f64>) -> Self {
        let mut n = 0u64;
        let (mut mean, mut m2) = (0.0, 0.0);
        for v in values {
            n += 1;
            let delta = v - mean;
            mean += delta / n as f64;
            m2 += delta * (v - mean);
        }
        let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        Self {
            mean,
            std_error: (var / n as f64).sqrt(),
            replicates: n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaRegimeEstimate {
    /// Monte-Carlo `E[exp(-beta (C - n ln n)/n)]`.
    pub estimate: MeanEstimate,
    /// `Gamma(1 + beta)`.
    pub predicted: f64,
}

/// Desk-scale stand-in for the covering probability when `c = beta/n`: the
/// Laplace transform of the normalized cover time, whose limit is `Gamma(1+beta)`.
pub fn beta_regime_estimate(beta: f64, n: usize, reps: u64, seed: u64) -> Result<BetaRegimeEstimate> {
    if n < 100 {
        return Err(Error::InvalidArgument(format!("n must be >= 100, got {n}")));
    }
    check_reps(reps)?;
    let predicted = gumbel_exp_moment(beta)?;
    let cover = CoverTimeSampler::new(n)?;
    let estimate = MeanEstimate::from_values(
        (0..reps).map(|r| (-beta * cover.sample(&mut replicate_rng(seed, r)).normalized).exp()),
    );
    Ok(BetaRegimeEstimate { estimate, predicted })
}

/// Monte-Carlo `P((C - n ln n)/n <= t)`.
pub fn normalized_cover_cdf(n: usize, t: f64, reps: u64, seed: u64) -> Result<CoverEstimate> {
    check_reps(reps)?;
    let cover = CoverTimeSampler::new(n)?;
    let hits = (0..reps)
        .filter(|&r| cover.sample(&mut replicate_rng(seed, r)).normalized <= t)
        .count() as u64;
    Ok(CoverEstimate::from_hits(hits, reps, seed))
}

/// Monte-Carlo mean of the normalized cover time.
pub fn normalized_cover_mean(n: usize, reps: u64, seed: u64) -> Result<MeanEstimate> {
    check_reps(reps)?;
    let cover = CoverTimeSampler::new(n)?;
    Ok(MeanEstimate::from_values(
        (0..reps).map(|r| cover.sample(&mut replicate_rng(seed, r)).normalized),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceTailReport {
    /// `P((C - (n-1) ln(n-1))/(n-1) <= gamma)` by Monte Carlo.
    pub empirical: CoverEstimate,
    pub std_error: f64,
    /// `e^{-lambda e^{-gamma}} / (1 - lambda)`.
    pub bound: f64,
    pub holds: bool,
}

/// Lower-tail bound on the cover time, checked against 3 standard errors.
pub fn laplace_tail_bound_check(n: usize, lambda: f64, gamma_: f64, reps: u64, seed: u64) -> Result<LaplaceTailReport> {
    if !(0.0..1.0).contains(&lambda) || !(gamma_ < -1.0) {
        return Err(Error::InvalidArgument(format!(
            "need lambda in [0, 1) and gamma < -1, got {lambda}, {gamma_}"
        )));
    }
    check_reps(reps)?;
    let cover = CoverTimeSampler::new(n)?;
    let nm1 = (n - 1) as f64;
    let hits = (0..reps)
        .filter(|&r| {
            let c = cover.sample(&mut replicate_rng(seed, r)).value as f64;
            (c - nm1 * nm1.ln()) / nm1 <= gamma_
        })
        .count() as u64;
    let empirical = CoverEstimate::from_hits(hits, reps, seed);
    let p = empirical.point;
    let std_error = (p * (1.0 - p) / reps as f64).sqrt();
    let bound = (-lambda * (-gamma_).exp()).exp() / (1.0 - lambda);
    Ok(LaplaceTailReport {
        empirical,
        std_error,
        bound,
        holds: p <= bound + 3.0 * std_error,
    })
}

/// Monte-Carlo `E[exp(lambda (n-1) exp(-C/(n-1)))]`, bounded by `1/(1-lambda)`.
pub fn laplace_mgf(n: usize, lambda: f64, reps: u64, seed: u64) -> Result<MeanEstimate> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("lambda must lie in [0, 1), got {lambda}")));
    }
    check_reps(reps)?;
    let cover = CoverTimeSampler::new(n)?;
    let nm1 = (n - 1) as f64;
    Ok(MeanEstimate::from_values((0..reps).map(|r| {
        let c = cover.sample(&mut replicate_rng(seed, r)).value as f64;
        (lambda * nm1 * (-c / nm1).exp()).exp()
    })))
}

/// One row of a complete-graph regime sweep with `c_n = n^{-d}`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RegimeRow {
    pub n: usize,
    pub c_rule: String,
    pub estimate: f64,
    /// 95% half-width.
    pub ci: f64,
    pub predicted: f64,
}

/// `P(C <= eta)` for every `(n, d)` pair, grid order `n` outer, `d` inner. Cell
/// `i` uses seed `seed + i`.
pub fn regime_sweep(ns: &[usize], exponents: &[f64], reps: u64, seed: u64) -> Result<Vec<RegimeRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        for &d in exponents {
            let cell = rows.len() as u64;
            let e = mc_complete_cover_prob(n, (n as f64).powf(-d), reps, seed.wrapping_add(cell))?;
            rows.push(RegimeRow {
                n,
                c_rule: format!("n^-{d}"),
                estimate: e.point,
                ci: e.half_width,
                predicted: complete_predicted_limit(d),
            });
        }
    }
    Ok(rows)
}

/// CSV with header `n,c_rule,estimate,ci,predicted`.
pub fn regime_sweep_csv(rows: &[RegimeRow]) -> String {
    let mut s = String::from("n,c_rule,estimate,ci,predicted\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.n, r.c_rule, r.estimate, r.ci, r.predicted);
    }
    s
}
