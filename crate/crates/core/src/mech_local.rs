//! Coordinate-local mechanism: sign truncation plus Laplace noise of scale `r = 2d/α`.
//!
//! Each coordinate is released as `Z_j = sgn(X_j) + r W_j` with `W_j` standard
//! Laplace. The conditional density of `Z_j` given `X_j = x` is
//! `exp(-|z − sgn x| / r) / (2r)`, so the likelihood ratio between any two
//! inputs is at most `exp(2/r) = exp(α/d)` and the `d` independent
//! coordinates compose to `e^α`.

use rand::Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::private::{MechanismKind, PrivateSample};
use crate::sparse_model::RawSample;

/// How `sgn` maps the real line.
///
/// `Symmetric` (`+1` for `x ≥ 0`, `-1` otherwise) is what the risk analysis
/// and the thresholds assume. `Binary` (`1` for `x ≥ 0`, `0` otherwise) is
/// kept for completeness; its null-coordinate mean is `1/2`, not `0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SignConvention {
    #[default]
    Symmetric,
    Binary,
}

impl SignConvention {
    #[inline]
    pub fn sgn(self, x: f64) -> f64 {
        match (self, x >= 0.0) {
            (_, true) => 1.0,
            (SignConvention::Symmetric, false) => -1.0,
            (SignConvention::Binary, false) => 0.0,
        }
    }
}

/// Standard Laplace(1) draw by inverting the distribution function.
#[inline]
pub fn sample_laplace<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    if u < 0.5 {
        (2.0 * u).ln()
    } else {
        -(2.0 * (1.0 - u)).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalMechConfig {
    alpha: f64,
    d: usize,
    convention: SignConvention,
}

impl LocalMechConfig {
    pub fn new(alpha: f64, d: usize) -> Result<Self> {
        require_positive("alpha", alpha)?;
        if d == 0 {
            return Err(invalid("d", "must be >= 1"));
        }
        Ok(Self {
            alpha,
            d,
            convention: SignConvention::Symmetric,
        })
    }

    pub fn with_convention(mut self, convention: SignConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn convention(&self) -> SignConvention {
        self.convention
    }

    /// Laplace scale `r = 2d/α`.
    pub fn scale(&self) -> f64 {
        2.0 * self.d as f64 / self.alpha
    }

    /// The release for input `x` given a Laplace(1) draw `w`.
    #[inline]
    pub fn release(&self, x: f64, w: f64) -> f64 {
        self.convention.sgn(x) + self.scale() * w
    }

    pub fn privatize_row<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(x.len(), out.len());
        let r = self.scale();
        for (z, &v) in out.iter_mut().zip(x) {
            *z = self.convention.sgn(v) + r * sample_laplace(rng);
        }
    }

    /// Conditional density `q(z | x) = exp(-|z − sgn x| / r) / (2r)`.
    pub fn conditional_density(&self, z: f64, x: f64) -> f64 {
        let r = self.scale();
        (-(z - self.convention.sgn(x)).abs() / r).exp() / (2.0 * r)
    }
}

pub fn privatize_local<R: Rng + ?Sized>(
    x: &RawSample,
    cfg: &LocalMechConfig,
    rng: &mut R,
) -> Result<PrivateSample> {
    if x.d() != cfg.d {
        return Err(Error::DimensionMismatch {
            expected: cfg.d,
            actual: x.d(),
        });
    }
    let mut rows = vec![0.0; x.n() * x.d()];
    for (out, row) in rows.chunks_exact_mut(cfg.d).zip(x.rows()) {
        cfg.privatize_row(row, rng, out);
    }
    PrivateSample::from_rows(x.n(), x.d(), rows, MechanismKind::Local, cfg.alpha)
}

/// Exact ratio `q(z | x) / q(z | x′) = exp((|z − sgn x′| − |z − sgn x|) / r)`.
pub fn dp_ratio_certificate_local(cfg: &LocalMechConfig, x: f64, x_prime: f64, z: f64) -> f64 {
    let sgn = |v| cfg.convention.sgn(v);
    (((z - sgn(x_prime)).abs() - (z - sgn(x)).abs()) / cfg.scale()).exp()
}
