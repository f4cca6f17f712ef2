//! Monte Carlo estimation of the normalized Hamming risk of a full pipeline.
//!
//! A trial draws `X` at a worst-case θ, privatizes it, thresholds the column
//! means and returns `|η̂ − η| / s`. Rows are streamed in blocks of
//! [`BLOCK_ROWS`]; block `b` of trial `t` reads only from `stream(seed, t, b)`,
//! and partial sums are combined in block order, then trials in trial order.
//! Output is therefore identical for any thread count.

use serde::{Deserialize, Serialize};

use crate::bounds::{
    critical_values, fano_lower_bound_afr, fano_lower_bound_exact_recovery, lower_bound_local,
    upper_bound_global_at, upper_bound_local_at, BoundInput, BoundValue, Regime,
};
use crate::error::{invalid, Result};
use crate::mech_global::GlobalMechConfig;
use crate::mech_local::{LocalMechConfig, SignConvention};
use crate::noise::{DivergenceKind, NoiseModel, NoiseSpec};
use crate::private::MechanismKind;
use crate::problem::Problem;
use crate::rng::{stream, BLOCK_ROWS};
use crate::selectors::{resolve_policy, select_from_means, PolicyKind, PolicySpec, SelectorKind, ThresholdPolicy};
use crate::sparse_model::{hamming, worst_case_theta, Sign, SparseMean, SupportIndicator, Variant};

fn default_policy() -> PolicySpec {
    PolicySpec::LargeA
}

fn default_trials() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    pub s: usize,
    pub n: usize,
    pub a: f64,
    #[serde(default = "one")]
    pub sigma: f64,
    pub alpha: f64,
    #[serde(default)]
    pub noise: NoiseSpec,
    pub mechanism: MechanismKind,
    #[serde(default)]
    pub selector: SelectorKind,
    #[serde(default = "default_policy")]
    pub policy: PolicySpec,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_pattern: Option<Vec<Sign>>,
    #[serde(default)]
    pub sign_convention: SignConvention,
}

fn one() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn problem(&self) -> Problem {
        Problem {
            d: self.d,
            s: self.s,
            n: self.n,
            a: self.a,
            sigma: self.sigma,
            alpha: self.alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub mean_normalized_loss: f64,
    pub std_error: f64,
    pub trials: usize,
    pub per_trial_losses: Option<Vec<f64>>,
    pub validity_flags: Vec<String>,
}

impl RiskEstimate {
    /// Mean and `sd/√trials` with the `n − 1` sample standard deviation.
    pub fn from_losses(losses: Vec<f64>, validity_flags: Vec<String>) -> Self {
        let t = losses.len() as f64;
        let mean = losses.iter().sum::<f64>() / t;
        let var = if losses.len() > 1 {
            losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (t - 1.0)
        } else {
            0.0
        };
        Self {
            mean_normalized_loss: mean,
            std_error: (var / t).sqrt(),
            trials: losses.len(),
            per_trial_losses: Some(losses),
            validity_flags,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

fn map_ordered<T, F>(count: u64, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..count).map(f).collect()
}

#[derive(Debug, Clone)]
enum Mechanism {
    Local(LocalMechConfig),
    Global(GlobalMechConfig),
}

/// A validated configuration with everything needed to run trials.
#[derive(Debug, Clone)]
pub struct Pipeline {
    cfg: ExperimentConfig,
    noise: NoiseModel,
    theta: SparseMean,
    eta: SupportIndicator,
    mechanism: Mechanism,
    policy: ThresholdPolicy,
}

impl Pipeline {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let problem = cfg.problem();
        problem.validate()?;
        let noise = cfg.noise.build()?;
        let theta = worst_case_theta(
            cfg.d,
            cfg.s,
            cfg.a,
            cfg.variant,
            cfg.sign_pattern.as_deref(),
            None,
        )?;
        let mechanism = match cfg.mechanism {
            MechanismKind::Local => Mechanism::Local(
                LocalMechConfig::new(cfg.alpha, cfg.d)?.with_convention(cfg.sign_convention),
            ),
            MechanismKind::Global => Mechanism::Global(GlobalMechConfig::new(cfg.alpha, cfg.d)?),
        };
        let policy = resolve_policy(cfg.policy, cfg.mechanism, &noise, &problem);
        Ok(Self {
            eta: theta.indicator(),
            cfg: cfg.clone(),
            noise,
            theta,
            mechanism,
            policy,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn policy(&self) -> &ThresholdPolicy {
        &self.policy
    }

    fn blocks(&self) -> u64 {
        self.cfg.n.div_ceil(BLOCK_ROWS) as u64
    }

    fn block_rows(&self, block: u64) -> usize {
        let start = block as usize * BLOCK_ROWS;
        BLOCK_ROWS.min(self.cfg.n - start)
    }

    fn local_block(&self, mech: &LocalMechConfig, trial: u64, block: u64) -> Vec<f64> {
        let d = self.cfg.d;
        let mut rng = stream(self.cfg.seed, trial, block);
        let mut x = vec![0.0; d];
        let mut z = vec![0.0; d];
        let mut sums = vec![0.0; d];
        for _ in 0..self.block_rows(block) {
            self.theta.sample_row(self.cfg.sigma, &self.noise, &mut rng, &mut x);
            mech.privatize_row(&x, &mut rng, &mut z);
            for (acc, v) in sums.iter_mut().zip(&z) {
                *acc += v;
            }
        }
        sums
    }

    fn global_block(&self, mech: &GlobalMechConfig, trial: u64, block: u64) -> Vec<u64> {
        let d = self.cfg.d;
        let words = d.div_ceil(64);
        let mut rng = stream(self.cfg.seed, trial, block);
        let mut x = vec![0.0; d];
        let mut x_bits = vec![0u64; words];
        let mut z_bits = vec![0u64; words];
        let mut counts = vec![0u64; d];
        for _ in 0..self.block_rows(block) {
            self.theta.sample_row(self.cfg.sigma, &self.noise, &mut rng, &mut x);
            mech.draw_release_bits(&x, &mut rng, &mut x_bits, &mut z_bits);
            for (j, c) in counts.iter_mut().enumerate() {
                *c += z_bits[j / 64] >> (j % 64) & 1;
            }
        }
        counts
    }

    /// Column means of the privatized sample for one trial.
    pub fn private_means(&self, trial: u64, exec: Execution) -> Vec<f64> {
        let n = self.cfg.n as f64;
        match &self.mechanism {
            Mechanism::Local(mech) => {
                let parts = map_ordered(self.blocks(), exec, |b| self.local_block(mech, trial, b));
                let mut sums = vec![0.0; self.cfg.d];
                for part in parts {
                    for (acc, v) in sums.iter_mut().zip(part) {
                        *acc += v;
                    }
                }
                sums.into_iter().map(|s| s / n).collect()
            }
            Mechanism::Global(mech) => {
                let parts = map_ordered(self.blocks(), exec, |b| self.global_block(mech, trial, b));
                let mut counts = vec![0u64; self.cfg.d];
                for part in parts {
                    for (acc, v) in counts.iter_mut().zip(part) {
                        *acc += v;
                    }
                }
                let mut means: Vec<f64> = counts
                    .into_iter()
                    .map(|c| mech.b() * (2.0 * c as f64 - n) / n)
                    .collect();
                means[0] *= mech.first_coordinate_factor();
                means
            }
        }
    }

    pub fn run_trial(&self, trial: u64, exec: Execution) -> f64 {
        let means = self.private_means(trial, exec);
        let eta_hat = select_from_means(&means, self.policy.tau, self.cfg.selector);
        let miss = hamming(&eta_hat, &self.eta).expect("selector output has length d");
        miss as f64 / self.cfg.s as f64
    }

    pub fn estimate(&self, exec: Execution) -> RiskEstimate {
        // Trials are the outer parallel loop; blocks run serially inside each one.
        let inner = Execution::Serial;
        let losses = map_ordered(self.cfg.trials as u64, exec, |t| self.run_trial(t, inner));
        RiskEstimate::from_losses(losses, self.policy.validity_flags.clone())
    }
}

/// Normalized loss of trial `trial_index`.
pub fn run_trial(cfg: &ExperimentConfig, trial_index: u64) -> Result<f64> {
    Ok(Pipeline::new(cfg)?.run_trial(trial_index, Execution::Parallel))
}

pub fn estimate_risk(cfg: &ExperimentConfig) -> Result<RiskEstimate> {
    estimate_risk_with(cfg, Execution::Parallel)
}

pub fn estimate_risk_with(cfg: &ExperimentConfig, exec: Execution) -> Result<RiskEstimate> {
    if cfg.trials < 2 {
        return Err(invalid("trials", format!("need at least 2, got {}", cfg.trials)));
    }
    Ok(Pipeline::new(cfg)?.estimate(exec))
}

/// Theoretical quantities evaluated at a configuration.
///
/// `None` means the quantity is undefined there; the reason is in `flags`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundSummary {
    pub tau: Option<f64>,
    pub lb_local: Option<f64>,
    pub ub_matched: Option<f64>,
    pub fano_er: Option<f64>,
    pub fano_afr: Option<f64>,
    pub a_star_local: Option<f64>,
    pub a_star_global: Option<f64>,
    pub flags: Vec<String>,
}

/// Evaluates every bound for `cfg`, with the upper bound matched to its
/// mechanism, selector and threshold.
pub fn bound_summary(cfg: &ExperimentConfig) -> Result<BoundSummary> {
    let problem = cfg.problem();
    problem.validate()?;
    let noise = cfg.noise.build()?;
    let input = BoundInput::new(problem, &noise);
    let policy = resolve_policy(cfg.policy, cfg.mechanism, &noise, &problem);
    let mut out = BoundSummary {
        tau: Some(policy.tau),
        ..Default::default()
    };
    let mut flags: Vec<String> = Vec::new();

    match lower_bound_local(&input) {
        Ok(v) => out.lb_local = Some(v),
        Err(e) => flags.push(tag("lb_local", e)),
    }

    let regime = match policy.kind {
        PolicyKind::LargeA => Regime::LargeA,
        PolicyKind::SmallA => Regime::SmallA,
        PolicyKind::Manual if problem.a_over_sigma() >= 2.0 => Regime::LargeA,
        PolicyKind::Manual => Regime::SmallA,
    };
    let variant = match cfg.selector {
        SelectorKind::Plus => Variant::Plus,
        SelectorKind::Abs => Variant::Signed,
    };
    let ub: Result<BoundValue> = match cfg.mechanism {
        MechanismKind::Local => Ok(upper_bound_local_at(&input, regime, variant, policy.tau)),
        MechanismKind::Global => upper_bound_global_at(&input, regime, variant, policy.tau),
    };
    match ub {
        Ok(v) => {
            out.ub_matched = Some(v.value);
            flags.extend(v.flags.into_iter().map(|f| tag("ub_matched", f)));
        }
        Err(e) => flags.push(tag("ub_matched", e)),
    }

    match noise.divergence(problem.a_over_sigma(), DivergenceKind::Chi2) {
        Ok(chi2) => {
            let er = fano_lower_bound_exact_recovery(&input, chi2);
            out.fano_er = Some(er.value);
            flags.extend(er.flags.into_iter().map(|f| tag("fano_er", f)));
            match fano_lower_bound_afr(&input, chi2) {
                Ok(v) => {
                    out.fano_afr = Some(v.value);
                    flags.extend(v.flags.into_iter().map(|f| tag("fano_afr", f)));
                }
                Err(e) => flags.push(tag("fano_afr", e)),
            }
        }
        Err(e) => flags.push(tag("fano", e)),
    }

    match critical_values(&input) {
        Ok(cv) => {
            out.a_star_local = Some(cv.a_star_local);
            out.a_star_global = Some(cv.a_star_global);
        }
        Err(e) => flags.push(tag("a_star", e)),
    }
    out.flags = policy
        .validity_flags
        .iter()
        .map(|f| format!("policy: {f}"))
        .chain(flags)
        .collect();
    Ok(out)
}

fn tag(source: &str, msg: impl std::fmt::Display) -> String {
    format!("{source}: {msg}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SweepAxis {
    A,
    N,
    Alpha,
    D,
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::A => "A",
            SweepAxis::N => "N",
            SweepAxis::Alpha => "ALPHA",
            SweepAxis::D => "D",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub axis_value: f64,
    pub config: ExperimentConfig,
    pub estimate: Option<RiskEstimate>,
    pub bounds: BoundSummary,
    pub error: Option<String>,
}

fn positive_integer(name: &'static str, v: f64) -> Result<usize> {
    if v.is_finite() && v >= 1.0 && v.fract() == 0.0 && v <= usize::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(invalid(name, format!("sweep value {v} is not a positive integer")))
    }
}

pub fn apply_axis(base: &ExperimentConfig, axis: SweepAxis, value: f64) -> Result<ExperimentConfig> {
    let mut cfg = base.clone();
    match axis {
        SweepAxis::A => cfg.a = value,
        SweepAxis::Alpha => cfg.alpha = value,
        SweepAxis::N => cfg.n = positive_integer("n", value)?,
        SweepAxis::D => cfg.d = positive_integer("d", value)?,
    }
    Ok(cfg)
}

/// One row per grid point. Every point reuses the base seed, so neighbouring
/// rows share random numbers. Errors are recorded in-row.
pub fn sweep(base: &ExperimentConfig, axis: SweepAxis, grid: &[f64]) -> Result<Vec<SweepRow>> {
    sweep_with(base, axis, grid, Execution::Parallel)
}

pub fn sweep_with(
    base: &ExperimentConfig,
    axis: SweepAxis,
    grid: &[f64],
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(invalid("grid", "must be nonempty"));
    }
    Ok(grid
        .iter()
        .map(|&value| {
            let mut row = SweepRow {
                axis,
                axis_value: value,
                config: base.clone(),
                estimate: None,
                bounds: BoundSummary::default(),
                error: None,
            };
            let result = apply_axis(base, axis, value).and_then(|cfg| {
                row.config = cfg.clone();
                row.bounds = bound_summary(&cfg)?;
                estimate_risk_with(&cfg, exec)
            });
            match result {
                Ok(est) => row.estimate = Some(est),
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect())
}
