//! Small shared report types.

use serde::{Deserialize, Serialize};

/// A Monte Carlo probability estimate with its exact binomial standard
/// error. Acceptance always compares `estimate - 3 * se` against the
/// bound being tested so that failures are statistically meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCi {
    pub estimate: f64,
    pub se: f64,
    pub trials: u64,
    pub seed: u64,
}

impl EstimateWithCi {
    pub fn from_hits(hits: u64, trials: u64, seed: u64) -> Self {
        let p = hits as f64 / trials as f64;
        EstimateWithCi {
            estimate: p,
            se: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
            seed,
        }
    }

    /// `estimate - 3 se > bound`
    pub fn exceeds_with_margin(&self, bound: f64) -> bool {
        self.estimate - 3.0 * self.se > bound
    }
}
