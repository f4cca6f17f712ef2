//! Symmetric, unit-variance, strongly log-concave noise laws.
//!
//! A [`NoiseModel`] carries its density, distribution function, an exact
//! sampler and the two curvature constants of its potential `φ = -log p`:
//! `c_lower` (strong convexity, `φ'' ≥ c`) and `c_upper` (`φ'' ≤ c₊`).
//! Every risk bound in [`crate::bounds`] is a function of these constants.
//!
//! Two families are provided. The standard Gaussian has `c = c₊ = 1`. The
//! tilted family has raw potential
//!
//! ```text
//! ψ(y) = λ (√(1 + y²) − 1) + c_raw · y² / 2
//! ```
//!
//! rescaled to unit variance. The smooth `√(1 + y²)` tilt keeps the potential
//! twice continuously differentiable so that a finite `c₊` exists; its second
//! derivative is `λ / (1 + y²)^{3/2} ∈ (0, λ]`. After the rescaling
//! `x = y / s` with `s² = Var(y)`, curvature is multiplied by `s²`:
//! `c_lower = c_raw s²` and `c_upper = (c_raw + λ) s²`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::quadrature;

/// `√c · T` for the integration window; the Mill's-type bound puts the tail
/// mass beyond `T` below `2(1 − Φ(7.5)) ≈ 6.4e-14`.
const WINDOW_STD_UNITS: f64 = 7.5;
const SETUP_TOL: f64 = 1e-13;
const DIVERGENCE_TOL: f64 = 1e-9;

/// Standard normal distribution function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Serializable description of a noise law, used by experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseSpec {
    #[default]
    Gaussian,
    Tilted { c_raw: f64, lambda: f64 },
}

impl NoiseSpec {
    pub fn build(&self) -> Result<NoiseModel> {
        match *self {
            NoiseSpec::Gaussian => Ok(NoiseModel::gaussian()),
            NoiseSpec::Tilted { c_raw, lambda } => NoiseModel::tilted(c_raw, lambda),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DivergenceKind {
    Kl,
    Chi2,
    Tv,
}

/// `C₁ = 2Φ(2√c) − 1` and the density at 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConstants {
    pub c1: f64,
    pub p2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Family {
    Gaussian,
    Tilted {
        c_raw: f64,
        lambda: f64,
        /// Standard deviation of the raw law; `x = y / scale`.
        scale: f64,
        /// `log ∫ exp(-ψ(y)) dy`.
        log_norm: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    name: String,
    family: Family,
    c_lower: f64,
    c_upper: Option<f64>,
}

fn raw_potential(y: f64, c_raw: f64, lambda: f64) -> f64 {
    lambda * ((1.0 + y * y).sqrt() - 1.0) + 0.5 * c_raw * y * y
}

impl NoiseModel {
    pub fn gaussian() -> Self {
        Self {
            name: "gaussian".to_owned(),
            family: Family::Gaussian,
            c_lower: 1.0,
            c_upper: Some(1.0),
        }
    }

    /// Tilted family with raw potential `λ(√(1+y²) − 1) + c_raw y²/2`, rescaled to unit variance.
    pub fn tilted(c_raw: f64, lambda: f64) -> Result<Self> {
        require_positive("c_raw", c_raw)?;
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(invalid("lambda", format!("must be finite and >= 0, got {lambda}")));
        }
        let window = WINDOW_STD_UNITS * 1.3 / c_raw.sqrt();
        let unnormalized = |y: f64| (-raw_potential(y, c_raw, lambda)).exp();
        // Even integrands: integrate the right half only.
        let half_mass = quadrature::integrate(unnormalized, 0.0, window, SETUP_TOL, 0.0)?;
        let half_second =
            quadrature::integrate(|y| y * y * unnormalized(y), 0.0, window, SETUP_TOL, 0.0)?;
        let variance = half_second / half_mass;
        let scale = variance.sqrt();
        let s2 = scale * scale;
        Ok(Self {
            name: format!("tilted(c_raw={c_raw},lambda={lambda})"),
            family: Family::Tilted {
                c_raw,
                lambda,
                scale,
                log_norm: (2.0 * half_mass).ln(),
            },
            c_lower: c_raw * s2,
            c_upper: Some((c_raw + lambda) * s2),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn c_lower(&self) -> f64 {
        self.c_lower
    }

    pub fn c_upper(&self) -> Option<f64> {
        self.c_upper
    }

    /// Half-width of an interval carrying all but ~1e-13 of the mass.
    pub fn window(&self) -> f64 {
        WINDOW_STD_UNITS / self.c_lower.sqrt()
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        match self.family {
            Family::Gaussian => -0.5 * x * x - 0.5 * (2.0 * PI).ln(),
            Family::Tilted {
                c_raw,
                lambda,
                scale,
                log_norm,
            } => scale.ln() - raw_potential(scale * x, c_raw, lambda) - log_norm,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self.family {
            Family::Gaussian => std_normal_pdf(x),
            Family::Tilted { .. } => self.log_pdf(x).exp(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.family {
            Family::Gaussian => std_normal_cdf(x),
            Family::Tilted { .. } => {
                if x == 0.0 {
                    return 0.5;
                }
                let upper = x.abs().min(2.0 * self.window());
                let half = quadrature::integrate(|t| self.pdf(t), 0.0, upper, 1e-13, 1e-16)
                    .expect("density is smooth and bounded on a finite window");
                (0.5 + half.copysign(x)).clamp(0.0, 1.0)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            Family::Gaussian => StandardNormal.sample(rng),
            Family::Tilted {
                c_raw,
                lambda,
                scale,
                ..
            } => {
                // Proposal N(0, 1/c_raw); the target/proposal ratio is exp(-λ(√(1+y²)−1)) ≤ 1.
                let sd = 1.0 / c_raw.sqrt();
                loop {
                    let z: f64 = StandardNormal.sample(rng);
                    let y = sd * z;
                    let accept = (-lambda * ((1.0 + y * y).sqrt() - 1.0)).exp();
                    if rng.random::<f64>() < accept {
                        return y / scale;
                    }
                }
            }
        }
    }

    /// Lower bound on the rejection sampler's acceptance probability (1 for the Gaussian).
    ///
    /// Since `√(1+y²) − 1 ≤ |y|`, Jensen gives `E exp(-λ(√(1+Y²)−1)) ≥ exp(-λ E|Y|)`
    /// with `E|Y| = √(2/(π c_raw))` under the proposal.
    pub fn acceptance_lower_bound(&self) -> f64 {
        match self.family {
            Family::Gaussian => 1.0,
            Family::Tilted { c_raw, lambda, .. } => (-lambda * (2.0 / (PI * c_raw)).sqrt()).exp(),
        }
    }

    /// `E[sgn(ā + ξ)] = 2F(ā) − 1` under the ±1 sign convention.
    pub fn sign_mean(&self, a_over_sigma: f64) -> f64 {
        2.0 * self.cdf(a_over_sigma) - 1.0
    }

    pub fn constants(&self) -> NoiseConstants {
        NoiseConstants {
            c1: 2.0 * std_normal_cdf(2.0 * self.c_lower.sqrt()) - 1.0,
            p2: self.pdf(2.0),
        }
    }

    /// Divergence between the law of `ξ` and that of `ξ + ā`, by adaptive quadrature.
    pub fn divergence(&self, a_over_sigma: f64, kind: DivergenceKind) -> Result<f64> {
        require_positive("a_over_sigma", a_over_sigma)?;
        let shift = a_over_sigma;
        let lo = -self.window() - 2.0 * shift;
        let hi = self.window() + 2.0 * shift;
        let value = match kind {
            DivergenceKind::Kl => quadrature::integrate(
                |x| {
                    let lp = self.log_pdf(x);
                    lp.exp() * (lp - self.log_pdf(x - shift))
                },
                lo,
                hi,
                DIVERGENCE_TOL,
                1e-300,
            )?,
            DivergenceKind::Chi2 => {
                if self.c_upper.is_none() {
                    return Err(Error::MissingCurvatureBound(self.name.clone()));
                }
                // The integrand p²(x)/p(x-ā) peaks near -ā; widen the left side.
                let ratio = quadrature::integrate(
                    |x| (2.0 * self.log_pdf(x) - self.log_pdf(x - shift)).exp(),
                    lo - 2.0 * shift,
                    hi,
                    DIVERGENCE_TOL,
                    1e-300,
                )?;
                ratio - 1.0
            }
            DivergenceKind::Tv => {
                // Densities of a symmetric unimodal law and its shift cross at ā/2.
                0.5 * quadrature::integrate_pieces(
                    |x| (self.pdf(x) - self.pdf(x - shift)).abs(),
                    &[lo, 0.5 * shift, hi],
                    DIVERGENCE_TOL,
                    1e-300,
                )?
            }
        };
        Ok(value.max(0.0))
    }

    /// The density cap `p(x) ≤ exp(-c x²/2)/√2`.
    pub fn density_cap(&self, x: f64) -> f64 {
        (-0.5 * self.c_lower * x * x).exp() / SQRT_2
    }

    /// The Mill's-type tail bound `P(|ξ| ≥ r) ≤ 2(1 − Φ(√c r))`.
    pub fn mills_tail_bound(&self, r: f64) -> f64 {
        2.0 * (1.0 - std_normal_cdf(self.c_lower.sqrt() * r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
        (0..=n).map(move |i| lo + (hi - lo) * i as f64 / n as f64)
    }

    fn models() -> Vec<NoiseModel> {
        vec![
            NoiseModel::gaussian(),
            NoiseModel::tilted(1.0, 1.0).unwrap(),
            NoiseModel::tilted(2.0, 0.5).unwrap(),
            NoiseModel::tilted(0.5, 3.0).unwrap(),
        ]
    }

    // Plain composite Simpson on a wide window; independent of the adaptive routine.
    fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(lo + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn gaussian_values() {
        let g = NoiseModel::gaussian();
        assert!((g.pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert_eq!(g.cdf(0.0), 0.5);
        assert_eq!(g.c_lower(), 1.0);
        assert_eq!(g.c_upper(), Some(1.0));
    }

    #[test]
    fn tilted_without_tilt_is_gaussian() {
        let g = NoiseModel::gaussian();
        let t = NoiseModel::tilted(1.0, 0.0).unwrap();
        for x in grid(-6.0, 6.0, 240) {
            assert!((g.pdf(x) - t.pdf(x)).abs() < 1e-9, "x={x}");
        }
        assert!((t.c_lower() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tilted_rescaling_shrinks_curvature() {
        // Oracle: raw variance of exp(-(√(1+y²)-1) - y²/2) by composite Simpson.
        let q = |y: f64| (-((1.0 + y * y).sqrt() - 1.0) - 0.5 * y * y).exp();
        let mass = simpson(q, -14.0, 14.0, 20_000);
        let second = simpson(|y| y * y * q(y), -14.0, 14.0, 20_000);
        let raw_var = second / mass;
        assert!(raw_var < 1.0);
        let t = NoiseModel::tilted(1.0, 1.0).unwrap();
        // Curvature scales by Var(y): c = c_raw · Var(y) < 1.
        assert!((t.c_lower() - raw_var).abs() < 1e-9, "{} vs {raw_var}", t.c_lower());
        assert!(t.c_lower() < 1.0);
        assert!((t.c_upper().unwrap() - 2.0 * raw_var).abs() < 1e-9);
    }

    #[test]
    fn moments_by_quadrature() {
        for m in models() {
            let w = 2.0 * m.window();
            let mass = simpson(|x| m.pdf(x), -w, w, 40_000);
            let var = simpson(|x| x * x * m.pdf(x), -w, w, 40_000);
            assert!((mass - 1.0).abs() < 1e-9, "{}: mass {mass}", m.name());
            assert!((var - 1.0).abs() < 1e-6, "{}: var {var}", m.name());
        }
    }

    #[test]
    fn shape_invariants_on_grid() {
        for m in models() {
            let c = m.c_lower();
            let h = 1e-3;
            for x in grid(-6.0, 6.0, 1200) {
                assert!((m.pdf(x) - m.pdf(-x)).abs() < 1e-12);
                assert!(m.pdf(x) <= m.density_cap(x), "{} cap at {x}", m.name());
                let g = |t: f64| m.log_pdf(t) + 0.5 * c * t * t;
                let second = g(x + h) - 2.0 * g(x) + g(x - h);
                assert!(second <= 1e-9, "{}: second difference {second} at {x}", m.name());
            }
            for r in grid(0.05, 5.0, 100) {
                let tail = 2.0 * (1.0 - m.cdf(r));
                assert!(tail <= m.mills_tail_bound(r) + 1e-12, "{} Mill's at {r}", m.name());
            }
        }
    }

    #[test]
    fn sign_mean_values() {
        let g = NoiseModel::gaussian();
        assert_eq!(g.sign_mean(0.0), 0.0);
        // 2Φ(1) − 1 = erf(1/√2)
        assert!((g.sign_mean(1.0) - 0.682_689_492_137_085_9).abs() < 1e-12);
        let c = g.constants();
        assert!((g.sign_mean(2.0) - 0.954_499_736_103_641_6).abs() < 1e-12);
        assert!((c.c1 - 0.954_499_736_103_641_6).abs() < 1e-12);
        assert!((c.p2 - (-2.0f64).exp() / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!((c.p2 - 0.053_990_966_513_188_06).abs() < 1e-12);
    }

    #[test]
    fn constants_in_unit_interval() {
        for m in models() {
            let c = m.constants();
            assert!(c.c1 > 0.0 && c.c1 < 1.0);
            assert!(c.p2 > 0.0);
        }
    }

    #[test]
    fn sign_mean_lower_bounds() {
        for m in models() {
            let NoiseConstants { c1, p2 } = m.constants();
            for a in grid(2.0, 6.0, 40) {
                assert!(m.sign_mean(a) >= c1 - 1e-12, "{} at {a}", m.name());
            }
            for a in grid(0.01, 1.99, 99) {
                assert!(m.sign_mean(a) >= 2.0 * a * p2, "{} at {a}", m.name());
            }
        }
    }

    #[test]
    fn gaussian_divergences_match_closed_forms() {
        let g = NoiseModel::gaussian();
        for a in [0.5, 1.0, 2.0] {
            let kl = g.divergence(a, DivergenceKind::Kl).unwrap();
            let chi2 = g.divergence(a, DivergenceKind::Chi2).unwrap();
            let tv = g.divergence(a, DivergenceKind::Tv).unwrap();
            assert!((kl / (0.5 * a * a) - 1.0).abs() < 1e-6);
            assert!((chi2 / ((a * a).exp() - 1.0) - 1.0).abs() < 1e-6);
            // TV between N(0,1) and N(a,1) is 2Φ(a/2) − 1.
            assert!((tv - (2.0 * std_normal_cdf(0.5 * a) - 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn divergences_vanish_for_tiny_shift() {
        for m in models() {
            for kind in [DivergenceKind::Kl, DivergenceKind::Chi2, DivergenceKind::Tv] {
                let v = m.divergence(1e-3, kind).unwrap();
                // KL and χ² are quadratic in the shift, TV is linear.
                let cap = if kind == DivergenceKind::Tv { 1e-3 } else { 1e-5 };
                assert!(v < cap, "{} {kind:?} = {v}", m.name());
            }
        }
    }

    #[test]
    fn divergence_rejects_non_positive_shift() {
        assert!(NoiseModel::gaussian().divergence(0.0, DivergenceKind::Kl).is_err());
    }

    #[test]
    fn tilted_rejects_bad_parameters() {
        assert!(NoiseModel::tilted(f64::NAN, 1.0).is_err());
        assert!(NoiseModel::tilted(1.0, f64::INFINITY).is_err());
        assert!(NoiseModel::tilted(0.0, 1.0).is_err());
        assert!(NoiseModel::tilted(1.0, -0.1).is_err());
    }

    #[test]
    fn empirical_variance_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in models() {
            let n = 1_000_000;
            let (mut s2, mut s4) = (0.0, 0.0);
            for _ in 0..n {
                let x = m.sample(&mut rng);
                s2 += x * x;
                s4 += x * x * x * x;
            }
            let var = s2 / n as f64;
            let se = ((s4 / n as f64 - var * var) / n as f64).sqrt();
            assert!((var - 1.0).abs() < 3.0 * se, "{}: {var} ± {se}", m.name());
        }
    }

    #[test]
    fn spec_round_trip() {
        let spec: NoiseSpec =
            serde_json::from_str(r#"{"family":"tilted","c_raw":2.0,"lambda":0.5}"#).unwrap();
        assert_eq!(spec, NoiseSpec::Tilted { c_raw: 2.0, lambda: 0.5 });
        let g: NoiseSpec = serde_json::from_str(r#"{"family":"gaussian"}"#).unwrap();
        assert_eq!(g.build().unwrap(), NoiseModel::gaussian());
    }
}
