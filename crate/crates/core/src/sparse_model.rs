//! Sparse mean parameters, raw data `X = θ + σξ` and Hamming losses.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::noise::NoiseModel;

/// Membership class: nonzero entries `≥ a` (`Plus`) or `|θ_j| ≥ a` (`Signed`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Variant {
    #[default]
    Plus,
    Signed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Pos,
    #[serde(rename = "-")]
    Neg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMean {
    entries: Vec<f64>,
    s: usize,
    a: f64,
    variant: Variant,
}

impl SparseMean {
    pub fn new(entries: Vec<f64>, s: usize, a: f64, variant: Variant) -> Result<Self> {
        require_positive("a", a)?;
        let d = entries.len();
        if d == 0 {
            return Err(invalid("d", "must be >= 1"));
        }
        if s == 0 || s > d {
            return Err(invalid("s", format!("need 1 <= s <= d = {d}, got {s}")));
        }
        let support = entries.iter().filter(|&&t| t != 0.0).count();
        if support > s {
            return Err(invalid("entries", format!("support size {support} exceeds s = {s}")));
        }
        for (j, &t) in entries.iter().enumerate().filter(|(_, &t)| t != 0.0) {
            let ok = match variant {
                Variant::Plus => t >= a,
                Variant::Signed => t.abs() >= a,
            };
            if !ok || !t.is_finite() {
                return Err(invalid(
                    "entries",
                    format!("entry {j} = {t} violates the {variant:?} class with a = {a}"),
                ));
            }
        }
        Ok(Self {
            entries,
            s,
            a,
            variant,
        })
    }

    pub fn d(&self) -> usize {
        self.entries.len()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn indicator(&self) -> SupportIndicator {
        SupportIndicator(self.entries.iter().map(|&t| t != 0.0).collect())
    }

    /// Writes one row `θ + σξ` into `out`.
    pub fn sample_row<R: Rng + ?Sized>(
        &self,
        sigma: f64,
        noise: &NoiseModel,
        rng: &mut R,
        out: &mut [f64],
    ) {
        debug_assert_eq!(out.len(), self.entries.len());
        for (x, &t) in out.iter_mut().zip(&self.entries) {
            *x = t + sigma * noise.sample(rng);
        }
    }
}

/// θ with exactly `s` entries of magnitude `a`.
///
/// Support defaults to the first `s` coordinates and signs default to `+`.
/// `sign_pattern` is only honored for [`Variant::Signed`].
pub fn worst_case_theta(
    d: usize,
    s: usize,
    a: f64,
    variant: Variant,
    sign_pattern: Option<&[Sign]>,
    support_placement: Option<&[usize]>,
) -> Result<SparseMean> {
    if d == 0 {
        return Err(invalid("d", "must be >= 1"));
    }
    if s == 0 || s > d {
        return Err(invalid("s", format!("need 1 <= s <= d = {d}, got {s}")));
    }
    let default_support: Vec<usize> = (0..s).collect();
    let support = support_placement.unwrap_or(&default_support);
    if support.len() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            actual: support.len(),
        });
    }
    if let Some(signs) = sign_pattern {
        if signs.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                actual: signs.len(),
            });
        }
    }
    let mut entries = vec![0.0; d];
    for (k, &j) in support.iter().enumerate() {
        if j >= d || entries[j] != 0.0 {
            return Err(invalid("support_placement", format!("index {j} out of range or repeated")));
        }
        let negative = variant == Variant::Signed
            && sign_pattern.is_some_and(|signs| signs[k] == Sign::Neg);
        entries[j] = if negative { -a } else { a };
    }
    SparseMean::new(entries, s, a, variant)
}

/// `n × d` raw data, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample {
    n: usize,
    d: usize,
    rows: Vec<f64>,
    sigma: f64,
    noise: String,
}

impl RawSample {
    pub fn from_rows(n: usize, d: usize, rows: Vec<f64>, sigma: f64, noise: &str) -> Result<Self> {
        if rows.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                actual: rows.len(),
            });
        }
        Ok(Self {
            n,
            d,
            rows,
            sigma,
            noise: noise.to_owned(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn noise_name(&self) -> &str {
        &self.noise
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks_exact(self.d)
    }

    pub fn column_means(&self) -> Vec<f64> {
        column_means(&self.rows, self.n, self.d)
    }
}

pub(crate) fn column_means(rows: &[f64], n: usize, d: usize) -> Vec<f64> {
    let mut sums = vec![0.0; d];
    for row in rows.chunks_exact(d) {
        for (s, &x) in sums.iter_mut().zip(row) {
            *s += x;
        }
    }
    sums.iter_mut().for_each(|s| *s /= n as f64);
    sums
}

pub fn generate<R: Rng + ?Sized>(
    theta: &SparseMean,
    n: usize,
    sigma: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<RawSample> {
    if n == 0 {
        return Err(invalid("n", "must be >= 1"));
    }
    require_positive("sigma", sigma)?;
    let d = theta.d();
    let mut rows = vec![0.0; n * d];
    for row in rows.chunks_exact_mut(d) {
        theta.sample_row(sigma, noise, rng, row);
    }
    RawSample::from_rows(n, d, rows, sigma, noise.name())
}

/// `η ∈ {0,1}^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportIndicator(pub Vec<bool>);

impl SupportIndicator {
    pub fn zeros(d: usize) -> Self {
        Self(vec![false; d])
    }

    pub fn ones(d: usize) -> Self {
        Self(vec![true; d])
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        Self(bits.iter().map(|&b| b != 0).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

pub fn hamming(eta_hat: &SupportIndicator, eta: &SupportIndicator) -> Result<usize> {
    if eta_hat.len() != eta.len() {
        return Err(Error::DimensionMismatch {
            expected: eta.len(),
            actual: eta_hat.len(),
        });
    }
    Ok(eta_hat.0.iter().zip(&eta.0).filter(|(a, b)| a != b).count())
}

/// Hamming loss divided by the sparsity `s`.
pub fn normalized_hamming(eta_hat: &SupportIndicator, eta: &SupportIndicator, s: usize) -> Result<f64> {
    if s == 0 {
        return Err(invalid("s", "must be >= 1"));
    }
    Ok(hamming(eta_hat, eta)? as f64 / s as f64)
}
