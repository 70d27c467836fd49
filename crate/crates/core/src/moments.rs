//! Sample moments: means, sample covariance σ̂_ij and the
//! variance-of-products estimate θ̂_ij used by adaptive thresholding.
//!
//! All divisors are n (not n − 1), matching the estimator definitions
//! used throughout the library.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// n×p data matrix, rows are observations.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: DMatrix<f64>,
}

impl DataMatrix {
    /// Validates n ≥ 2, p ≥ 2 and finite entries.
    pub fn new(rows: DMatrix<f64>) -> Result<Self> {
        if rows.nrows() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 observations, got {}",
                rows.nrows()
            )));
        }
        if rows.ncols() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 variables, got {}",
                rows.ncols()
            )));
        }
        if !rows.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(
                "data contains non-finite entries".into(),
            ));
        }
        Ok(Self { rows })
    }

    /// Builds from row-major nested vectors; all rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty data".into()));
        }
        let p = rows[0].len();
        for (k, r) in rows.iter().enumerate() {
            if r.len() != p {
                return Err(Error::InvalidInput(format!(
                    "row {} has {} fields, expected {}",
                    k + 1,
                    r.len(),
                    p
                )));
            }
        }
        let mat = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
        Self::new(mat)
    }

    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn p(&self) -> usize {
        self.rows.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.rows
    }

    /// X̄_i for every column.
    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.rows
            .column_iter()
            .map(|c| c.iter().sum::<f64>() / n)
            .collect()
    }

    /// Data with column means removed.
    pub fn centered(&self) -> DMatrix<f64> {
        let means = self.column_means();
        let mut y = self.rows.clone();
        for (j, mut col) in y.column_iter_mut().enumerate() {
            col.add_scalar_mut(-means[j]);
        }
        y
    }

    /// Restriction to the given columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Result<DataMatrix> {
        let p = self.p();
        if idx.len() < 2 {
            return Err(Error::InvalidArgument(
                "column selection needs at least 2 indices".into(),
            ));
        }
        if let Some(&bad) = idx.iter().find(|&&j| j >= p) {
            return Err(Error::InvalidArgument(format!(
                "column index {bad} out of range for p = {p}"
            )));
        }
        let mat = DMatrix::from_fn(self.n(), idx.len(), |i, a| self.rows[(i, idx[a])]);
        Ok(DataMatrix { rows: mat })
    }

    /// Restriction to the given rows (observations), in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<DataMatrix> {
        let n = self.n();
        if idx.len() < 2 {
            return Err(Error::InvalidArgument(
                "row selection needs at least 2 indices".into(),
            ));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidArgument(format!(
                "row index {bad} out of range for n = {n}"
            )));
        }
        let mat = DMatrix::from_fn(idx.len(), self.p(), |a, j| self.rows[(idx[a], j)]);
        Ok(DataMatrix { rows: mat })
    }
}

/// σ̂_ij = n⁻¹ Σ_k (X_ki − X̄_i)(X_kj − X̄_j).
pub fn sample_covariance(x: &DataMatrix) -> SymMatrix {
    let n = x.n() as f64;
    let y = x.centered();
    let full = y.transpose() * &y / n;
    // Mirror the upper triangle so symmetry is bitwise exact.
    SymMatrix::from_fn(x.p(), |i, j| full[(i, j)])
}

/// Which product-variance formula [`theta_hat_with`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaVariant {
    /// θ̂_ij = n⁻¹ Σ_k [X_ki X_kj − X̄_i X̄_j − σ̂_ij]² (uncentered products).
    #[default]
    Paper,
    /// θ̂_ij = n⁻¹ Σ_k [(X_ki − X̄_i)(X_kj − X̄_j) − σ̂_ij]² (centered products).
    Centered,
}

/// θ̂ with the default (uncentered-product) variant.
pub fn theta_hat(x: &DataMatrix) -> SymMatrix {
    theta_hat_with(x, ThetaVariant::Paper)
}

/// Entrywise variance of products, the plug-in estimate of
/// θ_ij = var(X_ki X_kj). Nonnegative and symmetric by construction.
pub fn theta_hat_with(x: &DataMatrix, variant: ThetaVariant) -> SymMatrix {
    let n = x.n();
    let p = x.p();
    let nf = n as f64;
    let means = x.column_means();
    let sigma = sample_covariance(x);
    let data = x.as_matrix();

    // Column slices are contiguous (column-major storage).
    let col = |j: usize| data.column(j);

    let columns: Vec<Vec<f64>> = (0..p)
        .into_par_iter()
        .map(|j| {
            let cj = col(j);
            let mut out = Vec::with_capacity(j + 1);
            for i in 0..=j {
                let ci = col(i);
                let acc = match variant {
                    ThetaVariant::Paper => {
                        let c = means[i] * means[j] + sigma.get(i, j);
                        ci.iter()
                            .zip(cj.iter())
                            .map(|(&a, &b)| {
                                let d = a * b - c;
                                d * d
                            })
                            .sum::<f64>()
                    }
                    ThetaVariant::Centered => {
                        let s = sigma.get(i, j);
                        ci.iter()
                            .zip(cj.iter())
                            .map(|(&a, &b)| {
                                let d = (a - means[i]) * (b - means[j]) - s;
                                d * d
                            })
                            .sum::<f64>()
                    }
                };
                out.push(acc / nf);
            }
            out
        })
        .collect();

    SymMatrix::from_fn(p, |i, j| columns[j][i])
}
