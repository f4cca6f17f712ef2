use thiserror::Error;

/// Errors raised by the mechanisms, models and evaluators in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error(
        "K_d is undefined for even d = {d}: the even-d normalizer gives 1/K_d = 0, so the output magnitude B is infinite"
    )]
    DegenerateEvenDimension { d: usize },

    #[error("dimension d = {d} exceeds the exact enumeration budget of {max}")]
    EnumerationTooLarge { d: usize, max: usize },

    #[error("quadrature did not converge on [{lower}, {upper}] (estimate {estimate:e}, error {error:e})")]
    QuadratureDiverged {
        lower: f64,
        upper: f64,
        estimate: f64,
        error: f64,
    },

    #[error("chi-square divergence requested for noise model `{0}` which has no finite curvature upper bound")]
    MissingCurvatureBound(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}
