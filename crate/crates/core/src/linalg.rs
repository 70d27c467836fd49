//! Dense symmetric linear-algebra primitives shared by all estimators.
//!
//! Everything here is deterministic: eigenvectors follow a fixed sign
//! convention (first nonzero coordinate positive) and ties in eigenvalues
//! are broken by the original index, so downstream estimates are
//! bit-reproducible for identical inputs.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense symmetric p×p matrix.
///
/// Storage is exactly symmetric: constructors either verify symmetry or
/// symmetrize via (A + Aᵀ)/2, mirroring the strict upper triangle so that
/// `m[(i, j)] == m[(j, i)]` holds bitwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    mat: DMatrix<f64>,
}

impl SymMatrix {
    /// Builds from an arbitrary square matrix, symmetrizing via (A + Aᵀ)/2.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                actual: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidArgument(
                "matrix dimension must be >= 1".into(),
            ));
        }
        let p = m.nrows();
        let mut out = m;
        for j in 0..p {
            for i in 0..j {
                let v = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(Self { mat: out })
    }

    /// Builds a symmetric matrix from `f(i, j)`, evaluated only for i ≤ j
    /// and mirrored.
    pub fn from_fn(p: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(p >= 1, "matrix dimension must be >= 1");
        let mut mat = DMatrix::<f64>::zeros(p, p);
        for j in 0..p {
            for i in 0..=j {
                let v = f(i, j);
                mat[(i, j)] = v;
                mat[(j, i)] = v;
            }
        }
        Self { mat }
    }

    pub fn zeros(p: usize) -> Self {
        assert!(p >= 1);
        Self {
            mat: DMatrix::zeros(p, p),
        }
    }

    pub fn identity(p: usize) -> Self {
        assert!(p >= 1);
        Self {
            mat: DMatrix::identity(p, p),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        assert!(!diag.is_empty());
        Self {
            mat: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn is_finite(&self) -> bool {
        self.mat.iter().all(|v| v.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Principal submatrix with rows and columns restricted to `idx`.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Result<SymMatrix> {
        let p = self.dim();
        if idx.is_empty() {
            return Err(Error::InvalidArgument("index set must be nonempty".into()));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= p) {
            return Err(Error::InvalidArgument(format!(
                "index {bad} out of range for dimension {p}"
            )));
        }
        let k = idx.len();
        let mut mat = DMatrix::<f64>::zeros(k, k);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                mat[(a, b)] = self.mat[(i, j)];
            }
        }
        Ok(SymMatrix { mat })
    }

    /// Entrywise difference; panics on dimension mismatch.
    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        SymMatrix {
            mat: &self.mat - &other.mat,
        }
    }

    /// Entrywise sum; panics on dimension mismatch.
    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        SymMatrix {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix { mat: &self.mat * c }
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending,
/// eigenvector columns orthonormal with the first nonzero coordinate of
/// each column positive.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    /// Reconstructs Σ λ_i v_i v_iᵀ with the given spectrum replacement.
    pub fn reconstruct_with(&self, values: &[f64]) -> SymMatrix {
        reconstruct(&self.vectors, values)
    }
}

fn ensure_finite(m: &SymMatrix, op: &str) -> Result<()> {
    if !m.is_finite() {
        return Err(Error::InvalidInput(format!(
            "{op}: matrix contains non-finite entries"
        )));
    }
    Ok(())
}

/// Fixes eigenvector sign so the first nonzero coordinate is positive.
fn fix_column_signs(vectors: &mut DMatrix<f64>) {
    for mut col in vectors.column_iter_mut() {
        if let Some(first) = col.iter().find(|v| **v != 0.0) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
    }
}

/// V · diag(w) · Vᵀ, mirrored to exact symmetry.
fn reconstruct(vectors: &DMatrix<f64>, weights: &[f64]) -> SymMatrix {
    let p = vectors.nrows();
    debug_assert_eq!(weights.len(), vectors.ncols());
    let mut scaled = vectors.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= weights[k];
    }
    let full = scaled * vectors.transpose();
    let mut mat = DMatrix::<f64>::zeros(p, p);
    for j in 0..p {
        for i in 0..=j {
            let v = full[(i, j)];
            mat[(i, j)] = v;
            mat[(j, i)] = v;
        }
    }
    SymMatrix { mat }
}

/// Full symmetric eigendecomposition with deterministic ordering and signs.
pub fn sym_eigen(m: &SymMatrix) -> Result<EigenDecomposition> {
    ensure_finite(m, "sym_eigen")?;
    let se = m.mat.clone().symmetric_eigen();
    let p = m.dim();
    let mut order: Vec<usize> = (0..p).collect();
    // Descending by eigenvalue, ties by original index for determinism.
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let mut vectors = DMatrix::<f64>::zeros(p, p);
    for (new, &old) in order.iter().enumerate() {
        vectors.set_column(new, &se.eigenvectors.column(old));
    }
    fix_column_signs(&mut vectors);
    Ok(EigenDecomposition { values, vectors })
}

/// Operator norm (largest singular value); for symmetric input this is
/// max |λ_i|, computed without accumulating eigenvectors.
pub fn operator_norm(m: &SymMatrix) -> Result<f64> {
    ensure_finite(m, "operator_norm")?;
    let vals = m.mat.clone().symmetric_eigenvalues();
    Ok(vals.iter().fold(0.0f64, |a, v| a.max(v.abs())))
}

/// V·diag(max(λ_i, floor)^{-1/2})·Vᵀ. The floor regularizes near-singular
/// input instead of failing; for well-conditioned PD input with floor below
/// λ_min this is the exact inverse square root.
pub fn inv_sqrt(m: &SymMatrix, floor: f64) -> Result<SymMatrix> {
    if !floor.is_finite() || floor <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "inv_sqrt floor must be positive, got {floor}"
        )));
    }
    let eig = sym_eigen(m)?;
    let weights: Vec<f64> = eig
        .values
        .iter()
        .map(|&l| 1.0 / l.max(floor).sqrt())
        .collect();
    Ok(reconstruct(&eig.vectors, &weights))
}

/// Singular-value (spectral) soft thresholding: V·diag(soft(λ_i, λ))·Vᵀ with
/// signed shrinkage soft(x, λ) = sign(x)·max(|x| − λ, 0). This is the
/// proximal map of λ‖·‖_* over symmetric matrices.
pub fn svt(m: &SymMatrix, lambda: f64) -> Result<SymMatrix> {
    Ok(svt_with_spectrum(m, lambda)?.0)
}

/// Like [`svt`], also returning the shrunk spectrum (descending); used by
/// the LOREC solver to track nuclear norms and numerical rank cheaply.
pub(crate) fn svt_with_spectrum(m: &SymMatrix, lambda: f64) -> Result<(SymMatrix, Vec<f64>)> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "svt threshold must be a nonnegative real, got {lambda}"
        )));
    }
    let eig = sym_eigen(m)?;
    let shrunk: Vec<f64> = eig
        .values
        .iter()
        .map(|&x| x.signum() * (x.abs() - lambda).max(0.0))
        .collect();
    let out = reconstruct(&eig.vectors, &shrunk);
    Ok((out, shrunk))
}

/// soft(x, t) = sign(x)·max(|x| − t, 0).
pub fn soft(x: f64, t: f64) -> f64 {
    x.signum() * (x.abs() - t).max(0.0)
}
