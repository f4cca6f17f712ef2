//! Coordinate-global hypercube mechanism.
//!
//! For each row: take the sign vector `x̃ = sgn(X) ∈ {-1,1}^d`, draw
//! `Y ~ Bernoulli(π_α)` with `π_α = e^α/(e^α+1)`, then draw `z̃` uniformly on
//! the half-cube
//!
//! ```text
//! A(x̃) = { z̃ ∈ {-B,B}^d : ⟨z̃,x̃⟩ > 0, or ⟨z̃,x̃⟩ = 0 and z̃₁ = B x̃₁ }   (Y = 1)
//! C(x̃) = { z̃ ∈ {-B,B}^d : ⟨z̃,x̃⟩ < 0, or ⟨z̃,x̃⟩ = 0 and z̃₁ = -B x̃₁ }  (Y = 0)
//! ```
//!
//! with `B = (e^α+1)/(e^α−1) · K_d`. For even `d` the first coordinate is
//! multiplied by `(d−2)/(2(d−1))`. The choice of `K_d` makes `E[Z | X] = sgn(X)`.
//!
//! Vertices are stored as bitsets (bit set ⇔ coordinate is `+B`, or `+1` for
//! `x̃`), so `⟨z̃,x̃⟩ / B = d − 2·popcount(z ⊕ x)`.

use num_integer::Integer;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::private::{MechanismKind, PrivateSample};
use crate::sparse_model::RawSample;

/// Largest `d` handled by the exact-rational `K_d` path.
pub const EXACT_KD_MAX_D: usize = 64;

/// Largest `d` for exact pmf enumeration (2^20 vertices).
pub const ENUMERATION_MAX_D: usize = 20;

fn check_kd_domain(d: usize) -> Result<()> {
    if d == 0 {
        return Err(invalid("d", "must be >= 1"));
    }
    if d == 2 {
        return Err(Error::DegenerateEvenDimension { d });
    }
    Ok(())
}

fn binomial_u128(m: u128, k: u128) -> u128 {
    let k = k.min(m - k);
    (0..k).fold(1u128, |c, i| c * (m - i) / (i + 1))
}

/// `K_d` as a reduced fraction `(numerator, denominator)`, for `d ≤ 64`.
///
/// Odd `d`: `K_d = 2^{d−1} / C(d−1, (d−1)/2)`.
/// Even `d`: `K_d = d · 2^{d−2} / ((d−2) · C(d−2, d/2−1))`.
pub fn kd_exact(d: usize) -> Result<(u128, u128)> {
    check_kd_domain(d)?;
    if d > EXACT_KD_MAX_D {
        return Err(invalid("d", format!("exact K_d is limited to d <= {EXACT_KD_MAX_D}")));
    }
    let d = d as u128;
    let (num, den) = if d % 2 == 1 {
        (1u128 << (d - 1), binomial_u128(d - 1, (d - 1) / 2))
    } else {
        (d << (d - 2), (d - 2) * binomial_u128(d - 2, d / 2 - 1))
    };
    let g = num.gcd(&den);
    Ok((num / g, den / g))
}

fn ln_binomial(m: f64, k: f64) -> f64 {
    libm::lgamma(m + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(m - k + 1.0)
}

/// `K_d` through log-gamma; valid for every admissible `d`.
pub fn kd_log_gamma(d: usize) -> Result<f64> {
    check_kd_domain(d)?;
    let df = d as f64;
    let ln_k = if d % 2 == 1 {
        (df - 1.0) * std::f64::consts::LN_2 - ln_binomial(df - 1.0, (df - 1.0) / 2.0)
    } else {
        df.ln() + (df - 2.0) * std::f64::consts::LN_2
            - (df - 2.0).ln()
            - ln_binomial(df - 2.0, df / 2.0 - 1.0)
    };
    Ok(ln_k.exp())
}

/// `K_d`: exact rational for `d ≤ 64`, log-gamma beyond. Rejects even `d ≤ 2`.
pub fn compute_kd(d: usize) -> Result<f64> {
    if d <= EXACT_KD_MAX_D {
        let (num, den) = kd_exact(d)?;
        Ok(num as f64 / den as f64)
    } else {
        kd_log_gamma(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalMechConfig {
    alpha: f64,
    d: usize,
    pi_alpha: f64,
    kd: f64,
    b: f64,
}

impl GlobalMechConfig {
    pub fn new(alpha: f64, d: usize) -> Result<Self> {
        require_positive("alpha", alpha)?;
        let kd = compute_kd(d)?;
        // (e^α+1)/(e^α−1) = 1/tanh(α/2), stable for small α.
        let b = kd / (0.5 * alpha).tanh();
        if !b.is_finite() {
            return Err(invalid("alpha", format!("B is not finite for alpha = {alpha}")));
        }
        Ok(Self {
            alpha,
            d,
            pi_alpha: 1.0 / (1.0 + (-alpha).exp()),
            kd,
            b,
        })
    }

    /// Multiplies `B` by `factor`. Breaks unbiasedness; used as a negative control by audits.
    pub fn with_magnitude_scale(mut self, factor: f64) -> Self {
        self.b *= factor;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn pi_alpha(&self) -> f64 {
        self.pi_alpha
    }

    pub fn kd(&self) -> f64 {
        self.kd
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Multiplier on the first emitted coordinate: `(d−2)/(2(d−1))` for even `d`, else 1.
    pub fn first_coordinate_factor(&self) -> f64 {
        first_coordinate_factor(self.d)
    }

    fn words(&self) -> usize {
        self.d.div_ceil(64)
    }

    /// Draws the release for one row as a sign bitset (bit set ⇔ `+B`).
    ///
    /// `x_bits` and `z_bits` are scratch of length `⌈d/64⌉`.
    pub fn draw_release_bits<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        rng: &mut R,
        x_bits: &mut [u64],
        z_bits: &mut [u64],
    ) {
        sign_bits(x, x_bits);
        let orientation = if rng.random::<f64>() < self.pi_alpha {
            Orientation::A
        } else {
            Orientation::C
        };
        draw_half_cube_bits(x_bits, self.d, orientation, rng, z_bits);
    }

    pub fn privatize_row<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut [f64]) {
        let mut x_bits = vec![0u64; self.words()];
        let mut z_bits = vec![0u64; self.words()];
        self.draw_release_bits(x, rng, &mut x_bits, &mut z_bits);
        for (j, z) in out.iter_mut().enumerate() {
            *z = if bit(&z_bits, j) { self.b } else { -self.b };
        }
        out[0] *= self.first_coordinate_factor();
    }
}

pub fn first_coordinate_factor(d: usize) -> f64 {
    if d.is_multiple_of(2) {
        (d as f64 - 2.0) / (2.0 * (d as f64 - 1.0))
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// `⟨z̃, x̃⟩ > 0` side, ties broken by `z̃₁ = B x̃₁`.
    A,
    /// `⟨z̃, x̃⟩ < 0` side, ties broken by `z̃₁ = -B x̃₁`.
    C,
}

#[inline]
fn bit(bits: &[u64], j: usize) -> bool {
    bits[j / 64] >> (j % 64) & 1 == 1
}

/// Bit `j` set ⇔ `x_j ≥ 0` (so `sgn 0 = +1`).
pub fn sign_bits(x: &[f64], out: &mut [u64]) {
    out.iter_mut().for_each(|w| *w = 0);
    for (j, &v) in x.iter().enumerate() {
        if v >= 0.0 {
            out[j / 64] |= 1 << (j % 64);
        }
    }
}

/// Whether `z` lies in `A(x)`.
#[inline]
pub fn in_upper_half(z_bits: &[u64], x_bits: &[u64], d: usize) -> bool {
    let mismatches: u32 = z_bits.iter().zip(x_bits).map(|(z, x)| (z ^ x).count_ones()).sum();
    let inner = d as i64 - 2 * i64::from(mismatches);
    inner > 0 || (inner == 0 && (z_bits[0] ^ x_bits[0]) & 1 == 0)
}

fn draw_half_cube_bits<R: RngCore + ?Sized>(
    x_bits: &[u64],
    d: usize,
    orientation: Orientation,
    rng: &mut R,
    z_bits: &mut [u64],
) {
    for w in z_bits.iter_mut() {
        *w = rng.next_u64();
    }
    let tail = d % 64;
    if tail != 0 {
        *z_bits.last_mut().expect("d >= 1") &= (1u64 << tail) - 1;
    }
    // z ↦ -z maps A(x) onto C(x) bijectively; A and C partition the cube.
    if in_upper_half(z_bits, x_bits, d) != (orientation == Orientation::A) {
        for w in z_bits.iter_mut() {
            *w = !*w;
        }
        if tail != 0 {
            *z_bits.last_mut().expect("d >= 1") &= (1u64 << tail) - 1;
        }
    }
    debug_assert_eq!(in_upper_half(z_bits, x_bits, d), orientation == Orientation::A);
}

/// Uniform draw from `A(x̃)` or `C(x̃)` scaled by `b`, with no rejection loop.
pub fn sample_half_cube<R: Rng + ?Sized>(
    x_tilde: &[f64],
    orientation: Orientation,
    b: f64,
    rng: &mut R,
) -> Vec<f64> {
    let d = x_tilde.len();
    let words = d.div_ceil(64);
    let mut x_bits = vec![0u64; words];
    let mut z_bits = vec![0u64; words];
    sign_bits(x_tilde, &mut x_bits);
    draw_half_cube_bits(&x_bits, d, orientation, rng, &mut z_bits);
    (0..d).map(|j| if bit(&z_bits, j) { b } else { -b }).collect()
}

pub fn privatize_global<R: Rng + ?Sized>(
    x: &RawSample,
    cfg: &GlobalMechConfig,
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
    PrivateSample::from_rows(x.n(), x.d(), rows, MechanismKind::Global, cfg.alpha)
}

/// Exact law of `z̃` given `X = x`, indexed by vertex mask (bit `j` set ⇔ `z̃_j = +B`).
#[derive(Debug, Clone, PartialEq)]
pub struct VertexPmf {
    d: usize,
    b: f64,
    probs: Vec<f64>,
}

impl VertexPmf {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, mask: usize) -> f64 {
        self.probs[mask]
    }

    pub fn vertex(&self, mask: usize) -> Vec<f64> {
        (0..self.d).map(|j| if mask >> j & 1 == 1 { self.b } else { -self.b }).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        self.probs.iter().enumerate().map(|(m, &p)| (self.vertex(m), p))
    }
}

fn check_enumerable(cfg: &GlobalMechConfig, x: &[f64]) -> Result<()> {
    if cfg.d > ENUMERATION_MAX_D {
        return Err(Error::EnumerationTooLarge {
            d: cfg.d,
            max: ENUMERATION_MAX_D,
        });
    }
    if x.len() != cfg.d {
        return Err(Error::DimensionMismatch {
            expected: cfg.d,
            actual: x.len(),
        });
    }
    Ok(())
}

/// Exact pmf of `z̃` given `X = x`, from the half-cube definitions and `π_α`.
pub fn enumerate_pmf(x: &[f64], cfg: &GlobalMechConfig) -> Result<VertexPmf> {
    check_enumerable(cfg, x)?;
    let d = cfg.d;
    let mut x_bits = [0u64; 1];
    sign_bits(x, &mut x_bits);
    let half = (d as f64 - 1.0).exp2();
    let p_upper = cfg.pi_alpha / half;
    let p_lower = (1.0 - cfg.pi_alpha) / half;
    let probs = (0..1usize << d)
        .map(|mask| {
            if in_upper_half(&[mask as u64], &x_bits, d) {
                p_upper
            } else {
                p_lower
            }
        })
        .collect();
    Ok(VertexPmf {
        d,
        b: cfg.b,
        probs,
    })
}

/// `max_z̃ pmf(z̃ | x) / pmf(z̃ | x′)`.
pub fn dp_certificate_global(cfg: &GlobalMechConfig, x: &[f64], x_prime: &[f64]) -> Result<f64> {
    let p = enumerate_pmf(x, cfg)?;
    let q = enumerate_pmf(x_prime, cfg)?;
    Ok(p.probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| a / b)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `E[Z | X = x]` by summing over the exact pmf, with the even-`d` rescale applied.
pub fn conditional_mean_exact(x: &[f64], cfg: &GlobalMechConfig) -> Result<Vec<f64>> {
    let pmf = enumerate_pmf(x, cfg)?;
    let d = cfg.d;
    // Σ_z p(z) z_j = B (P(z_j = +B) − P(z_j = −B)).
    let mut plus = vec![0.0; d];
    let mut total = 0.0;
    for (mask, &p) in pmf.probs.iter().enumerate() {
        total += p;
        for (j, acc) in plus.iter_mut().enumerate() {
            if mask >> j & 1 == 1 {
                *acc += p;
            }
        }
    }
    let mut mean: Vec<f64> = plus.iter().map(|&pp| cfg.b * (2.0 * pp - total)).collect();
    mean[0] *= cfg.first_coordinate_factor();
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseModel;
    use crate::rng::stream;
    use crate::sparse_model::{generate, worst_case_theta, Variant};
    use rand::SeedableRng;

    // Oracle: brute-force half-cube membership from the set definition on ±1 vectors.
    fn in_a_brute(z: &[i32], x: &[i32]) -> bool {
        let ip: i32 = z.iter().zip(x).map(|(a, b)| a * b).sum();
        ip > 0 || (ip == 0 && z[0] == x[0])
    }

    fn pm_vector(mask: usize, d: usize) -> Vec<i32> {
        (0..d).map(|j| if mask >> j & 1 == 1 { 1 } else { -1 }).collect()
    }

    #[test]
    fn kd_exact_values() {
        assert_eq!(kd_exact(1).unwrap(), (1, 1));
        assert_eq!(kd_exact(3).unwrap(), (2, 1));
        assert_eq!(kd_exact(4).unwrap(), (4, 1));
        assert_eq!(kd_exact(5).unwrap(), (8, 3));
        assert_eq!(compute_kd(3).unwrap(), 2.0);
        assert_eq!(compute_kd(4).unwrap(), 4.0);
        assert!((compute_kd(5).unwrap() - 8.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn kd_even_formula_matches_factorial_form() {
        // (d−2)!(d−2) / (2^{d−1} (d/2−1)! (d/2)!) evaluated directly in f64.
        let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
        for d in (4..=30).step_by(2) {
            let inv = fact(d - 2) * (d as f64 - 2.0)
                / ((d as f64 - 1.0).exp2() * fact(d / 2 - 1) * fact(d / 2));
            let kd = compute_kd(d).unwrap();
            assert!((kd * inv - 1.0).abs() < 1e-12, "d = {d}");
        }
    }

    #[test]
    fn kd_paths_agree_on_overlap() {
        for d in (1..=EXACT_KD_MAX_D).filter(|&d| d % 2 == 1 || d >= 4) {
            let (n, m) = kd_exact(d).unwrap();
            let exact = n as f64 / m as f64;
            let lg = kd_log_gamma(d).unwrap();
            assert!((lg / exact - 1.0).abs() < 1e-12, "d = {d}: {lg} vs {exact}");
        }
    }

    #[test]
    fn kd_asymptotics() {
        for d in [10_000usize, 10_001] {
            let r = compute_kd(d).unwrap() / ((std::f64::consts::PI / 2.0).sqrt() * (d as f64).sqrt());
            assert!((r - 1.0).abs() < 0.01, "d = {d}: {r}");
        }
        for d in (1..400).filter(|&d| d != 2) {
            let k = compute_kd(d).unwrap();
            let ratio = k * k / d as f64;
            assert!(ratio <= 4.0, "d = {d}");
            if d >= 20 {
                assert!(ratio <= 2.0, "d = {d}: {ratio}");
            }
        }
    }

    #[test]
    fn kd_rejects_degenerate_even() {
        assert_eq!(compute_kd(2), Err(Error::DegenerateEvenDimension { d: 2 }));
        assert!(compute_kd(0).is_err());
        assert!(GlobalMechConfig::new(1.0, 2).is_err());
    }

    #[test]
    fn config_values() {
        let cfg = GlobalMechConfig::new(3f64.ln(), 3).unwrap();
        assert!((cfg.pi_alpha() - 0.75).abs() < 1e-15);
        assert!((cfg.b() - 4.0).abs() < 1e-12);
        let one = GlobalMechConfig::new(0.7, 1).unwrap();
        assert!((one.kd() - 1.0).abs() < 1e-15);
        // (2π−1)B = K_d = 1.
        assert!(((2.0 * one.pi_alpha() - 1.0) * one.b() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn membership_matches_brute_force() {
        for d in 1..=9 {
            for xm in 0..1usize << d {
                let x = pm_vector(xm, d);
                for zm in 0..1usize << d {
                    let z = pm_vector(zm, d);
                    assert_eq!(
                        in_upper_half(&[zm as u64], &[xm as u64], d),
                        in_a_brute(&z, &x),
                        "d={d} x={x:?} z={z:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn half_cube_cardinality() {
        for d in 1..=10 {
            for xm in 0..1usize << d {
                let x = pm_vector(xm, d);
                let count = (0..1usize << d).filter(|&zm| in_a_brute(&pm_vector(zm, d), &x)).count();
                assert_eq!(count, 1 << (d - 1));
            }
        }
    }

    #[test]
    fn two_dim_tie_break() {
        let mut rng = stream(4, 0, 0);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let v = sample_half_cube(&[1.0, 1.0], Orientation::A, 1.0, &mut rng);
            seen.insert((v[0] as i32, v[1] as i32));
        }
        assert_eq!(seen, [(1, -1), (1, 1)].into_iter().collect());
    }

    #[test]
    fn half_cube_frequencies_uniform() {
        let d = 4;
        let x = [1.0, -1.0, 1.0, 1.0];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let draws = 100_000;
        let mut counts = vec![0usize; 1 << d];
        for _ in 0..draws {
            let v = sample_half_cube(&x, Orientation::A, 1.0, &mut rng);
            let mask = v.iter().enumerate().fold(0, |m, (j, &z)| if z > 0.0 { m | 1 << j } else { m });
            counts[mask] += 1;
        }
        let p = 1.0 / (1 << (d - 1)) as f64;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        let xi: Vec<i32> = x.iter().map(|&v| if v >= 0.0 { 1 } else { -1 }).collect();
        for (mask, &c) in counts.iter().enumerate() {
            if in_a_brute(&pm_vector(mask, d), &xi) {
                assert!((c as f64 - draws as f64 * p).abs() < 4.0 * sd, "mask {mask}: {c}");
            } else {
                assert_eq!(c, 0);
            }
        }
    }

    #[test]
    fn sampler_stays_in_requested_half_for_large_d() {
        let mut rng = stream(8, 0, 0);
        for d in [63, 64, 65, 130] {
            let x: Vec<f64> = (0..d).map(|j| if j % 3 == 0 { -1.0 } else { 1.0 }).collect();
            let xi: Vec<i32> = x.iter().map(|&v| if v >= 0.0 { 1 } else { -1 }).collect();
            for orientation in [Orientation::A, Orientation::C] {
                for _ in 0..200 {
                    let z = sample_half_cube(&x, orientation, 2.0, &mut rng);
                    let zi: Vec<i32> = z.iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect();
                    assert_eq!(in_a_brute(&zi, &xi), orientation == Orientation::A);
                }
            }
        }
    }

    #[test]
    fn pmf_structure() {
        let cfg = GlobalMechConfig::new(3f64.ln(), 3).unwrap();
        let pmf = enumerate_pmf(&[0.2, -1.0, 3.0], &cfg).unwrap();
        let hi = cfg.pi_alpha() / 4.0;
        let lo = (1.0 - cfg.pi_alpha()) / 4.0;
        assert!(pmf.probabilities().iter().all(|&p| p == hi || p == lo));
        assert!((pmf.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let max = pmf.probabilities().iter().cloned().fold(0.0, f64::max);
        let min = pmf.probabilities().iter().cloned().fold(1.0, f64::min);
        assert!((max / min - 3.0).abs() < 1e-12);
        assert!(pmf.iter().all(|(v, _)| v.iter().all(|&c| c.abs() == cfg.b())));
    }

    #[test]
    fn enumeration_limits() {
        let cfg = GlobalMechConfig::new(1.0, 21).unwrap();
        assert!(matches!(
            enumerate_pmf(&[1.0; 21], &cfg),
            Err(Error::EnumerationTooLarge { .. })
        ));
        let cfg = GlobalMechConfig::new(1.0, 3).unwrap();
        assert!(enumerate_pmf(&[1.0, 1.0], &cfg).is_err());
    }

    #[test]
    fn certificate_examples() {
        let cfg = GlobalMechConfig::new(1.0, 4).unwrap();
        let x = [1.0, 1.0, 1.0, 1.0];
        assert_eq!(dp_certificate_global(&cfg, &x, &x).unwrap(), 1.0);
        let c = dp_certificate_global(&cfg, &x, &[-1.0, -1.0, -1.0, -1.0]).unwrap();
        assert!((c - 1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn unbiased_small_dimensions() {
        for d in [1usize, 3, 4, 5, 6, 7, 8] {
            let cfg = GlobalMechConfig::new(0.9, d).unwrap();
            for k in 0..20u64 {
                let x: Vec<f64> = (0..d).map(|j| if (k >> j) & 1 == 1 { 0.5 } else { -1.5 }).collect();
                let mean = conditional_mean_exact(&x, &cfg).unwrap();
                for (m, &v) in mean.iter().zip(&x) {
                    assert!((m - v.signum()).abs() < 1e-10, "d={d} x={x:?} mean={mean:?}");
                }
            }
        }
        // sgn 0 = +1
        let cfg = GlobalMechConfig::new(0.9, 3).unwrap();
        let mean = conditional_mean_exact(&[0.0, -0.0, -2.0], &cfg).unwrap();
        assert!((mean[0] - 1.0).abs() < 1e-10 && (mean[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tampered_magnitude_is_biased() {
        let cfg = GlobalMechConfig::new(1.0, 5).unwrap().with_magnitude_scale(2.0);
        let mean = conditional_mean_exact(&[1.0; 5], &cfg).unwrap();
        assert!((mean[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn monte_carlo_mean_matches_enumeration() {
        let d = 5;
        let cfg = GlobalMechConfig::new(1.0, d).unwrap();
        let theta = worst_case_theta(d, 2, 0.3, Variant::Plus, None, None).unwrap();
        let x = generate(&theta, 1, 1.0, &NoiseModel::gaussian(), &mut stream(1, 0, 0)).unwrap();
        let row = x.row(0).to_vec();
        let exact = conditional_mean_exact(&row, &cfg).unwrap();
        let mut rng = stream(1, 0, 1);
        let draws = 100_000;
        let mut sums = vec![0.0; d];
        let mut out = vec![0.0; d];
        for _ in 0..draws {
            cfg.privatize_row(&row, &mut rng, &mut out);
            sums.iter_mut().zip(&out).for_each(|(s, z)| *s += z);
        }
        for (j, (&s, &e)) in sums.iter().zip(&exact).enumerate() {
            let mean = s / draws as f64;
            let se = (cfg.b() * cfg.b() / draws as f64).sqrt();
            assert!((mean - e).abs() < 4.0 * se, "coordinate {j}: {mean} vs {e}");
        }
    }

    #[test]
    fn releases_have_magnitude_b() {
        let cfg = GlobalMechConfig::new(3f64.ln(), 3).unwrap();
        let theta = worst_case_theta(3, 1, 1.0, Variant::Plus, None, None).unwrap();
        let x = generate(&theta, 500, 1.0, &NoiseModel::gaussian(), &mut stream(3, 0, 0)).unwrap();
        let z = privatize_global(&x, &cfg, &mut stream(3, 0, 1)).unwrap();
        assert!(z.rows().flatten().all(|&v| (v.abs() - 4.0).abs() < 1e-12));
        let even = GlobalMechConfig::new(1.0, 4).unwrap();
        let theta = worst_case_theta(4, 1, 1.0, Variant::Plus, None, None).unwrap();
        let x = generate(&theta, 100, 1.0, &NoiseModel::gaussian(), &mut stream(3, 1, 0)).unwrap();
        let z = privatize_global(&x, &even, &mut stream(3, 1, 1)).unwrap();
        for row in z.rows() {
            assert!((row[0].abs() - even.b() / 3.0).abs() < 1e-12);
            assert!(row[1..].iter().all(|v| v.abs() == even.b()));
        }
    }

    #[test]
    fn d_one_two_point_law() {
        let cfg = GlobalMechConfig::new(0.5, 1).unwrap();
        let pmf = enumerate_pmf(&[-0.3], &cfg).unwrap();
        // mask 0 is −B, the sign of x.
        assert!((pmf.prob(0) - cfg.pi_alpha()).abs() < 1e-15);
        let mean = conditional_mean_exact(&[-0.3], &cfg).unwrap();
        assert!((mean[0] + 1.0).abs() < 1e-12);
    }
}
