//! Evaluation metrics for the Monte-Carlo studies.

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{inv_sqrt, operator_norm, SymMatrix};

/// Screening accuracy over T replicas:
/// Mean/SD of |Ĵ_t|, EQ = T⁻¹ Σ 1{Ĵ_t = J},
/// FP = [(p−p₁)T]⁻¹ Σ |Ĵ_t \ J|, FN = [p₁T]⁻¹ Σ |J \ Ĵ_t|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScreeningMetrics {
    pub mean: f64,
    pub sd: f64,
    pub eq: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fnr: f64,
}

pub(crate) fn mean_sd(values: &[f64]) -> (f64, f64) {
    let t = values.len();
    if t == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / t as f64;
    if t == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (t - 1) as f64;
    (mean, var.sqrt())
}

/// Exact displayed formulas with |J| = p₁; `j_hats` and `true_j` are sorted
/// index sets.
pub fn screening_metrics(j_hats: &[Vec<usize>], true_j: &[usize], p: usize) -> ScreeningMetrics {
    let t = j_hats.len();
    assert!(t >= 1, "need at least one replica");
    let p1 = true_j.len();
    let mut in_j = vec![false; p];
    for &i in true_j {
        in_j[i] = true;
    }

    let mut sizes = Vec::with_capacity(t);
    let mut eq_count = 0usize;
    let mut fp_total = 0usize;
    let mut fn_total = 0usize;
    for j_hat in j_hats {
        sizes.push(j_hat.len() as f64);
        let fp = j_hat.iter().filter(|&&i| !in_j[i]).count();
        let covered = j_hat.iter().filter(|&&i| in_j[i]).count();
        let fn_count = p1 - covered;
        fp_total += fp;
        fn_total += fn_count;
        if fp == 0 && fn_count == 0 {
            eq_count += 1;
        }
    }

    let (mean, sd) = mean_sd(&sizes);
    let fp = if p > p1 {
        fp_total as f64 / ((p - p1) * t) as f64
    } else {
        0.0
    };
    let fnr = fn_total as f64 / (p1 * t) as f64;
    ScreeningMetrics {
        mean,
        sd,
        eq: eq_count as f64 / t as f64,
        fp,
        fnr,
    }
}

/// RE = p^{-1/2}·‖Σ^{-1/2} Σ̂ Σ^{-1/2} − I‖_F with the floored inverse
/// square root of the truth.
pub fn re_metric(estimate: &SymMatrix, true_sigma: &SymMatrix) -> Result<f64> {
    let w = inv_sqrt(true_sigma, 1e-12)?;
    re_metric_with(estimate, &w)
}

/// RE with a precomputed Σ^{-1/2} (reused across replicas of one cell).
pub fn re_metric_with(estimate: &SymMatrix, inv_root: &SymMatrix) -> Result<f64> {
    let p = estimate.dim();
    if inv_root.dim() != p {
        return Err(crate::error::Error::DimensionMismatch {
            expected: p,
            actual: inv_root.dim(),
        });
    }
    let w = inv_root.as_matrix();
    let mut m = w * estimate.as_matrix() * w;
    for i in 0..p {
        m[(i, i)] -= 1.0;
    }
    Ok(m.norm() / (p as f64).sqrt())
}

/// EU = operator norm of Σ̂_u − Σ_u.
pub fn eu_metric(estimate_u: &SymMatrix, true_u: &SymMatrix) -> Result<f64> {
    operator_norm(&estimate_u.sub(true_u))
}
