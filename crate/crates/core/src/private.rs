use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MechanismKind {
    /// Per-coordinate sign + Laplace release, budget α/d per coordinate.
    Local,
    /// Whole-vector hypercube release, budget α.
    Global,
}

impl std::fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MechanismKind::Local => "LOCAL",
            MechanismKind::Global => "GLOBAL",
        })
    }
}

/// `n × d` privatized releases, row-major, tagged with the producing mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivateSample {
    n: usize,
    d: usize,
    rows: Vec<f64>,
    mechanism: MechanismKind,
    alpha: f64,
}

impl PrivateSample {
    pub fn from_rows(
        n: usize,
        d: usize,
        rows: Vec<f64>,
        mechanism: MechanismKind,
        alpha: f64,
    ) -> Result<Self> {
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
            mechanism,
            alpha,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mechanism(&self) -> MechanismKind {
        self.mechanism
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks_exact(self.d)
    }

    /// `(1/n) Σ_i Z[i][j]` for each column `j`.
    pub fn column_means(&self) -> Vec<f64> {
        crate::sparse_model::column_means(&self.rows, self.n, self.d)
    }

    /// Negates every release.
    pub fn negated(&self) -> Self {
        Self {
            rows: self.rows.iter().map(|z| -z).collect(),
            ..self.clone()
        }
    }

    /// Reorders columns so that new column `k` is old column `perm[k]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                actual: perm.len(),
            });
        }
        let mut rows = Vec::with_capacity(self.rows.len());
        for row in self.rows() {
            rows.extend(perm.iter().map(|&j| row[j]));
        }
        Ok(Self {
            rows,
            ..self.clone()
        })
    }

    pub fn rows_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.rows.chunks_exact_mut(self.d)
    }
}
