//! Exact privacy and unbiasedness certificates.

use rand::Rng;
use serde::{Deserialize, Serialize};
use sparse_ldp::mech_global::{
    conditional_mean_exact, dp_certificate_global, enumerate_pmf, GlobalMechConfig,
};
use sparse_ldp::mech_local::{dp_ratio_certificate_local, LocalMechConfig};
use sparse_ldp::rng::{stream, StreamRng as Rng64};
use sparse_ldp::Result;

pub const DP_TOLERANCE: f64 = 1e-10;
pub const MEAN_TOLERANCE: f64 = 1e-10;

fn default_dims() -> Vec<usize> {
    vec![3, 4, 5, 7, 8]
}

fn default_alphas() -> Vec<f64> {
    vec![0.5, 1.0, 3f64.ln()]
}

fn default_unbiased_dims() -> Vec<usize> {
    vec![1, 3, 4, 5, 6, 7, 8]
}

fn default_unbiased_samples() -> usize {
    50
}

fn default_local_triples() -> usize {
    100_000
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    /// Dimensions for the privacy certificates of both mechanisms.
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_unbiased_dims")]
    pub unbiased_dims: Vec<usize>,
    #[serde(default = "default_unbiased_samples")]
    pub unbiased_samples: usize,
    #[serde(default = "default_local_triples")]
    pub local_triples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Test hook: multiplies the hypercube output magnitude. Anything but 1 breaks unbiasedness.
    #[serde(default = "one")]
    pub magnitude_scale: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub check: &'static str,
    pub mechanism: &'static str,
    pub d: usize,
    pub alpha: Option<f64>,
    /// Worst observed value: a likelihood ratio, or a max absolute deviation.
    pub worst: f64,
    pub target: f64,
    pub pass: bool,
}

fn signs_from_mask(mask: u64, d: usize) -> Vec<f64> {
    (0..d).map(|j| if mask >> j & 1 == 1 { 1.0 } else { -1.0 }).collect()
}

/// Sign patterns to try for one side of a pair: all of them for small `d`,
/// otherwise a fixed-size random subset.
fn patterns(d: usize, exhaustive_up_to: usize, rng: &mut Rng64) -> Vec<u64> {
    if d <= exhaustive_up_to {
        (0..1u64 << d).collect()
    } else {
        (0..8).map(|_| rng.random::<u64>() & ((1u64 << d) - 1)).collect()
    }
}

/// Max pmf ratio over input pairs, and the ratio on a fully flipped pair.
///
/// The law of the release only depends on the input signs, so sign patterns
/// cover every input.
fn global_dp(cfg: &GlobalMechConfig, rng: &mut Rng64) -> Result<(f64, f64)> {
    let d = cfg.d();
    let pmfs = |masks: Vec<u64>| -> Result<Vec<Vec<f64>>> {
        masks
            .into_iter()
            .map(|m| Ok(enumerate_pmf(&signs_from_mask(m, d), cfg)?.probabilities().to_vec()))
            .collect()
    };
    let left = pmfs(patterns(d, 4, rng))?;
    let right = pmfs(patterns(d, 8, rng))?;
    let mut worst = f64::NEG_INFINITY;
    for p in &left {
        for q in &right {
            let ratio = p.iter().zip(q).map(|(a, b)| a / b).fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(ratio);
        }
    }
    let full = (1u64 << d) - 1;
    let flipped = dp_certificate_global(cfg, &signs_from_mask(full, d), &signs_from_mask(0, d))?;
    Ok((worst.max(flipped), flipped))
}

fn local_dp(alpha: f64, d: usize, triples: usize, rng: &mut Rng64) -> Result<(f64, f64)> {
    let cfg = LocalMechConfig::new(alpha, d)?;
    let span = 3.0 * cfg.scale();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..triples {
        let x = rng.random_range(-3.0..3.0);
        let xp = rng.random_range(-3.0..3.0);
        let z = rng.random_range(-span..span);
        worst = worst.max(dp_ratio_certificate_local(&cfg, x, xp, z));
    }
    // Opposite signs with z beyond +1 give |z+1| − |z−1| = 2 exactly.
    let attained = dp_ratio_certificate_local(&cfg, 1.0, -1.0, span);
    Ok((worst, attained))
}

fn unbiasedness(cfg: &GlobalMechConfig, samples: usize, rng: &mut Rng64) -> Result<f64> {
    let d = cfg.d();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mean = conditional_mean_exact(&x, cfg)?;
        for (m, v) in mean.iter().zip(&x) {
            let sgn = if *v >= 0.0 { 1.0 } else { -1.0 };
            worst = worst.max((m - sgn).abs());
        }
    }
    Ok(worst)
}

pub fn run(cfg: &AuditConfig) -> Result<Vec<AuditRow>> {
    let mut rng = stream(cfg.seed, 0, 0);
    let mut rows = Vec::new();
    for &d in &cfg.dims {
        for &alpha in &cfg.alphas {
            let target = alpha.exp();
            let global = GlobalMechConfig::new(alpha, d)?;
            let (worst, flipped) = global_dp(&global, &mut rng)?;
            rows.push(AuditRow {
                check: "dp_ratio",
                mechanism: "GLOBAL",
                d,
                alpha: Some(alpha),
                worst,
                target,
                pass: worst <= target * (1.0 + DP_TOLERANCE)
                    && (flipped - target).abs() <= DP_TOLERANCE * target,
            });
            let local_target = (alpha / d as f64).exp();
            let (worst, attained) = local_dp(alpha, d, cfg.local_triples, &mut rng)?;
            rows.push(AuditRow {
                check: "dp_ratio_per_coordinate",
                mechanism: "LOCAL",
                d,
                alpha: Some(alpha),
                worst,
                target: local_target,
                pass: worst <= local_target * (1.0 + DP_TOLERANCE)
                    && (attained - local_target).abs() <= DP_TOLERANCE * local_target,
            });
        }
    }
    for &d in &cfg.unbiased_dims {
        let global = GlobalMechConfig::new(1.0, d)?.with_magnitude_scale(cfg.magnitude_scale);
        let worst = unbiasedness(&global, cfg.unbiased_samples, &mut rng)?;
        rows.push(AuditRow {
            check: "unbiasedness",
            mechanism: "GLOBAL",
            d,
            alpha: Some(1.0),
            worst,
            target: 0.0,
            pass: worst <= MEAN_TOLERANCE,
        });
    }
    Ok(rows)
}
