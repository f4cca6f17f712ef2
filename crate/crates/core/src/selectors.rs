//! Separable threshold selectors over averaged private releases.
//!
//! Selectors never see the sparsity `s`. Output coordinate `j` depends only on
//! the column mean `(1/n) Σ_i Z[i][j]`.

use serde::{Deserialize, Serialize};

use crate::noise::NoiseModel;
use crate::private::{MechanismKind, PrivateSample};
use crate::problem::Problem;
use crate::sparse_model::SupportIndicator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SelectorKind {
    /// `η̂⁺_j = 1{mean_j ≥ τ}`, for positive signals.
    #[default]
    Plus,
    /// `η̂_j = 1{|mean_j| ≥ τ}`, for signed signals.
    Abs,
}

impl std::fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SelectorKind::Plus => "PLUS",
            SelectorKind::Abs => "ABS",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectorOutput {
    pub eta_hat: SupportIndicator,
    pub tau: f64,
}

pub fn select_from_means(means: &[f64], tau: f64, kind: SelectorKind) -> SupportIndicator {
    SupportIndicator(
        means
            .iter()
            .map(|&m| match kind {
                SelectorKind::Plus => m >= tau,
                SelectorKind::Abs => m.abs() >= tau,
            })
            .collect(),
    )
}

pub fn select(z: &PrivateSample, tau: f64, kind: SelectorKind) -> SelectorOutput {
    SelectorOutput {
        eta_hat: select_from_means(&z.column_means(), tau, kind),
        tau,
    }
}

pub fn select_plus(z: &PrivateSample, tau: f64) -> SelectorOutput {
    select(z, tau, SelectorKind::Plus)
}

pub fn select_abs(z: &PrivateSample, tau: f64) -> SelectorOutput {
    select(z, tau, SelectorKind::Abs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PolicyKind {
    LargeA,
    SmallA,
    Manual,
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PolicyKind::LargeA => "LARGE_A",
            PolicyKind::SmallA => "SMALL_A",
            PolicyKind::Manual => "MANUAL",
        })
    }
}

/// How the threshold is chosen; `Manual` carries its own τ (which may be `+∞`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PolicySpec {
    LargeA,
    SmallA,
    Manual { tau: f64 },
}

impl PolicySpec {
    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicySpec::LargeA => PolicyKind::LargeA,
            PolicySpec::SmallA => PolicyKind::SmallA,
            PolicySpec::Manual { .. } => PolicyKind::Manual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    pub kind: PolicyKind,
    pub tau: f64,
    /// Preconditions of the matching risk bound that fail for these inputs.
    pub validity_flags: Vec<String>,
}

/// Resolves τ and records every violated precondition of the matching upper bound.
///
/// `LargeA` gives `τ = C₁/2`, `SmallA` gives `τ = p(2)·a/σ`. Violations are
/// reported, never fatal: sweeps deliberately cross regime boundaries.
pub fn resolve_policy(
    spec: PolicySpec,
    mechanism: MechanismKind,
    noise: &NoiseModel,
    problem: &Problem,
) -> ThresholdPolicy {
    let consts = noise.constants();
    let a_bar = problem.a_over_sigma();
    let alpha = problem.alpha;
    let d = problem.d as f64;
    let tau = match spec {
        PolicySpec::LargeA => consts.c1 / 2.0,
        PolicySpec::SmallA => consts.p2 * a_bar,
        PolicySpec::Manual { tau } => tau,
    };
    let mut flags = Vec::new();
    let mut check = |ok: bool, msg: &str| {
        if !ok {
            flags.push(msg.to_owned());
        }
    };
    if tau.is_nan() || tau <= 0.0 {
        check(false, "tau must be > 0");
    }
    let large_a = |tau: f64, check: &mut dyn FnMut(bool, &str)| {
        check(a_bar >= 2.0, "regime mismatched: LARGE_A assumes a >= 2 sigma");
        check(consts.c1 - tau > 0.0, "C1 - tau > 0 fails");
    };
    let small_a = |tau: f64, check: &mut dyn FnMut(bool, &str)| {
        let within = tau < 2.0 * a_bar * consts.p2;
        check(within, "tau < 2 a/sigma p(2) fails");
        if within && a_bar > 2.0 {
            check(false, "tau < 2 a/sigma p(2) holds but regime mismatched (a >= 2 sigma)");
        }
    };
    match (spec.kind(), mechanism) {
        (PolicyKind::LargeA, MechanismKind::Local) => {
            large_a(tau, &mut check);
            check(tau * alpha / (8.0 * d) <= 1.0, "tau alpha/(8d) <= 1 fails");
            check(alpha * (consts.c1 - tau) / (8.0 * d) <= 1.0, "alpha (C1 - tau)/(8d) <= 1 fails");
        }
        (PolicyKind::SmallA, MechanismKind::Local) => {
            small_a(tau, &mut check);
            check(tau * alpha / (8.0 * d) < 1.0, "tau alpha/(8d) < 1 fails");
            check(
                alpha * (a_bar * consts.p2 - tau / 2.0) / (4.0 * d) <= 1.0,
                "alpha (a/sigma p(2) - tau/2)/(4d) <= 1 fails",
            );
        }
        (PolicyKind::LargeA, MechanismKind::Global) => large_a(tau, &mut check),
        (PolicyKind::SmallA, MechanismKind::Global) => small_a(tau, &mut check),
        (PolicyKind::Manual, _) => {}
    }
    ThresholdPolicy {
        kind: spec.kind(),
        tau,
        validity_flags: flags,
    }
}
