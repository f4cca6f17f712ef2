use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Result};

/// Scalar parameters shared by policies, bounds and experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub d: usize,
    pub s: usize,
    pub n: usize,
    pub a: f64,
    pub sigma: f64,
    pub alpha: f64,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(invalid("d", "must be >= 1"));
        }
        if self.s == 0 || self.s > self.d {
            return Err(invalid("s", format!("need 1 <= s <= d = {}, got {}", self.d, self.s)));
        }
        if self.n == 0 {
            return Err(invalid("n", "must be >= 1"));
        }
        require_positive("a", self.a)?;
        require_positive("sigma", self.sigma)?;
        require_positive("alpha", self.alpha)
    }

    pub fn a_over_sigma(&self) -> f64 {
        self.a / self.sigma
    }

    /// Effective sample size `N = nα²/d²` of the coordinate-local regime.
    pub fn effective_sample_size(&self) -> f64 {
        self.n as f64 * self.alpha * self.alpha / (self.d as f64 * self.d as f64)
    }
}
