//! Seeded replicate streams and the shared Monte-Carlo estimate record.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Generator for replicate `replicate` of a run seeded with `seed`.
///
/// Each replicate owns a ChaCha stream, so results do not depend on the order
/// in which replicates are evaluated.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// A Monte-Carlo proportion with a 95% normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverEstimate {
    pub point: f64,
    pub half_width: f64,
    pub replicates: u64,
    pub seed: u64,
    /// Loop-length truncation used by the sampler, if any.
    pub truncation: Option<usize>,
    /// Upper bound on the loop mass discarded by the truncation.
    pub tail_bound: Option<f64>,
}

impl CoverEstimate {
    pub fn from_hits(hits: u64, replicates: u64, seed: u64) -> Self {
        let n = replicates as f64;
        let p = hits as f64 / n;
        Self {
            point: p,
            half_width: 1.96 * (p * (1.0 - p) / n).sqrt(),
            replicates,
            seed,
            truncation: None,
            tail_bound: None,
        }
    }

    pub fn with_truncation(mut self, k: usize, tail_bound: f64) -> Self {
        self.truncation = Some(k);
        self.tail_bound = Some(tail_bound);
        self
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.point - self.half_width, self.point + self.half_width)
    }

    /// JSON record with keys `estimate`, `ci`, `seed`, `budget`, `truncation_k`, `tail_bound`.
    pub fn to_json(&self) -> serde_json::Value {
        let (lo, hi) = self.interval();
        serde_json::json!({
            "estimate": self.point,
            "ci": [lo, hi],
            "seed": self.seed,
            "budget": self.replicates,
            "truncation_k": self.truncation,
            "tail_bound": self.tail_bound,
        })
    }
}
