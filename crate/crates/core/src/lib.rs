//! Support recovery for sparse means under local differential privacy.
//!
//! Data rows `X_i = θ + σξ_i` are privatized one at a time, either
//! coordinate by coordinate ([`mech_local`]) or as a whole vector
//! ([`mech_global`]). A threshold [`selectors`] rule then estimates the support
//! of θ from column means. [`bounds`] evaluates the matching risk bounds and
//! [`risk_engine`] measures the actual risk by reproducible Monte Carlo.

pub mod bounds;
pub mod error;
pub mod mech_global;
pub mod mech_local;
pub mod noise;
pub mod private;
pub mod problem;
pub mod quadrature;
pub mod risk_engine;
pub mod rng;
pub mod selectors;
pub mod sparse_model;

pub use error::{Error, Result};
pub use mech_global::{compute_kd, GlobalMechConfig};
pub use mech_local::{LocalMechConfig, SignConvention};
pub use noise::{NoiseModel, NoiseSpec};
pub use private::{MechanismKind, PrivateSample};
pub use problem::Problem;
pub use risk_engine::{estimate_risk, sweep, ExperimentConfig, RiskEstimate};
pub use selectors::{PolicySpec, SelectorKind};
pub use sparse_model::{RawSample, SparseMean, SupportIndicator, Variant};
