//! Two-stage composite estimators: pivotal-variable screening followed by
//! LOREC or POET on the detected block, entrywise thresholding elsewhere,
//! and block reassembly with exact zeros of the low-rank part outside the
//! Ĵ×Ĵ block.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::lorec::{self, LorecConfig};
use crate::moments::{sample_covariance, theta_hat, DataMatrix};
use crate::poet::{self, KChoice};
use crate::pvd::{detect_from_cov, PvdConfig};
use crate::thresholding::{
    adaptive_omega, apply_threshold, threshold_blocks, universal_omega, ThresholdMode,
    ThresholdRule, ThresholdSpec,
};

/// Which estimator produced a [`CovEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MethodKind {
    Lorec,
    PvdLorec,
    Poet,
    PvdPoet,
    Threshold,
}

impl MethodKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodKind::Lorec => "LOREC",
            MethodKind::PvdLorec => "PVD-LOREC",
            MethodKind::Poet => "POET",
            MethodKind::PvdPoet => "PVD-POET",
            MethodKind::Threshold => "THRESHOLD",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Diagnostics {
    pub elapsed_secs: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Assembled covariance estimate Σ̂^τ = low_rank + sparse.
#[derive(Debug, Clone)]
pub struct CovEstimate {
    pub sigma: SymMatrix,
    pub low_rank: SymMatrix,
    pub sparse: SymMatrix,
    pub k_hat: usize,
    pub j_hat: Option<Vec<usize>>,
    pub method: MethodKind,
    pub diagnostics: Diagnostics,
}

/// Sorts, deduplicates and range-checks an index set.
fn normalize_index_set(j_hat: &[usize], p: usize) -> Result<Vec<usize>> {
    if let Some(&bad) = j_hat.iter().find(|&&i| i >= p) {
        return Err(Error::InvalidArgument(format!(
            "index {bad} out of range for dimension {p}"
        )));
    }
    let mut out = j_hat.to_vec();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Embeds a |J|×|J| block into a p×p matrix, zero elsewhere.
fn embed_block(p: usize, idx: &[usize], block: &SymMatrix) -> SymMatrix {
    let mut pos = vec![usize::MAX; p];
    for (a, &i) in idx.iter().enumerate() {
        pos[i] = a;
    }
    SymMatrix::from_fn(p, |i, j| {
        if pos[i] != usize::MAX && pos[j] != usize::MAX {
            block.get(pos[i], pos[j])
        } else {
            0.0
        }
    })
}

/// Overwrites the J×J block of `base` with `block`.
fn overwrite_block(base: &SymMatrix, idx: &[usize], block: &SymMatrix) -> SymMatrix {
    let p = base.dim();
    let mut pos = vec![usize::MAX; p];
    for (a, &i) in idx.iter().enumerate() {
        pos[i] = a;
    }
    SymMatrix::from_fn(p, |i, j| {
        if pos[i] != usize::MAX && pos[j] != usize::MAX {
            block.get(pos[i], pos[j])
        } else {
            base.get(i, j)
        }
    })
}

/// The rate factor ω in a ThresholdSpec depends on run-time quantities
/// (n, p, ŝ₀), so the pipeline recomputes it and honors only the caller's
/// constant, rule, mode and diagonal policy.
fn resolve_omega(spec: &ThresholdSpec, n: usize, p: usize, s0: usize) -> ThresholdSpec {
    let omega = match spec.mode {
        ThresholdMode::Universal => universal_omega(n, p),
        ThresholdMode::Adaptive => adaptive_omega(s0, n, p),
    };
    ThresholdSpec { omega, ..*spec }
}

/// PVD-based LOREC: detect Ĵ, run LOREC on Σ̂_{ĴĴ}, threshold every entry
/// with i ∉ Ĵ or j ∉ Ĵ (universal soft by default), and reassemble with
/// the low-rank part zero outside Ĵ×Ĵ.
pub fn pvd_lorec(
    x: &DataMatrix,
    pvd_cfg: &PvdConfig,
    lorec_cfg: &LorecConfig,
    thr: &ThresholdSpec,
) -> Result<CovEstimate> {
    let start = Instant::now();
    let sigma_hat = sample_covariance(x);
    let det = detect_from_cov(&sigma_hat, x.n(), pvd_cfg);
    assemble_lorec(x, &sigma_hat, &det.j_hat, lorec_cfg, thr, start)
}

/// [`pvd_lorec`] with a caller-supplied index set instead of screening.
pub fn pvd_lorec_with_index_set(
    x: &DataMatrix,
    j_hat: &[usize],
    lorec_cfg: &LorecConfig,
    thr: &ThresholdSpec,
) -> Result<CovEstimate> {
    let start = Instant::now();
    let sigma_hat = sample_covariance(x);
    let j_hat = normalize_index_set(j_hat, x.p())?;
    assemble_lorec(x, &sigma_hat, &j_hat, lorec_cfg, thr, start)
}

fn assemble_lorec(
    x: &DataMatrix,
    sigma_hat: &SymMatrix,
    j_hat: &[usize],
    lorec_cfg: &LorecConfig,
    thr: &ThresholdSpec,
    start: Instant,
) -> Result<CovEstimate> {
    let n = x.n();
    let p = x.p();
    if j_hat.len() < 2 {
        return Err(Error::DegenerateScreening {
            found: j_hat.len(),
            need: 2,
        });
    }
    let block = sigma_hat.principal_submatrix(j_hat)?;
    let cfg = lorec_cfg.resolved(n, j_hat.len());
    let split = lorec::solve(&block, &cfg)?;

    let spec = resolve_omega(thr, n, p, j_hat.len());
    let theta_storage;
    let theta = match spec.mode {
        ThresholdMode::Adaptive => {
            theta_storage = theta_hat(x);
            Some(&theta_storage)
        }
        ThresholdMode::Universal => None,
    };
    let off = threshold_blocks(sigma_hat, j_hat, &spec, theta)?;

    let low_rank = embed_block(p, j_hat, &split.low_rank);
    let sparse = overwrite_block(&off, j_hat, &split.sparse);
    let k_hat = lorec::numerical_rank(&split.low_rank_spectrum);

    Ok(CovEstimate {
        sigma: low_rank.add(&sparse),
        low_rank,
        sparse,
        k_hat,
        j_hat: Some(j_hat.to_vec()),
        method: MethodKind::PvdLorec,
        diagnostics: Diagnostics {
            elapsed_secs: start.elapsed().as_secs_f64(),
            iterations: split.iterations,
            converged: split.converged,
        },
    })
}

/// PVD-based POET: detect Ĵ, run POET on X_{·Ĵ}, splice the block residuals
/// into ũ (raw data on Ĵᶜ), adaptively threshold the sample covariance of ũ
/// with ω_n = √(1/ŝ₀) + √(log p / n), and assemble Σ̂^τ = B̂B̂ᵀ + Σ̂_u^τ with
/// B̂ zero outside Ĵ.
pub fn pvd_poet(x: &DataMatrix, pvd_cfg: &PvdConfig, k: KChoice, c: f64) -> Result<CovEstimate> {
    pvd_poet_with(x, pvd_cfg, k, c, ThresholdRule::Soft)
}

/// [`pvd_poet`] with an explicit thresholding rule.
pub fn pvd_poet_with(
    x: &DataMatrix,
    pvd_cfg: &PvdConfig,
    k: KChoice,
    c: f64,
    rule: ThresholdRule,
) -> Result<CovEstimate> {
    let start = Instant::now();
    let sigma_hat = sample_covariance(x);
    let det = detect_from_cov(&sigma_hat, x.n(), pvd_cfg);
    assemble_poet(x, &det.j_hat, k, c, rule, start)
}

/// [`pvd_poet`] with a caller-supplied index set instead of screening.
pub fn pvd_poet_with_index_set(
    x: &DataMatrix,
    j_hat: &[usize],
    k: KChoice,
    c: f64,
) -> Result<CovEstimate> {
    let start = Instant::now();
    let j_hat = normalize_index_set(j_hat, x.p())?;
    assemble_poet(x, &j_hat, k, c, ThresholdRule::Soft, start)
}

fn assemble_poet(
    x: &DataMatrix,
    j_hat: &[usize],
    k: KChoice,
    c: f64,
    rule: ThresholdRule,
    start: Instant,
) -> Result<CovEstimate> {
    let n = x.n();
    let p = x.p();
    let need = match k {
        KChoice::Fixed(k) => (k + 1).max(2),
        KChoice::Auto => 2,
    };
    if j_hat.len() < need {
        return Err(Error::DegenerateScreening {
            found: j_hat.len(),
            need,
        });
    }

    let xj = x.select_columns(j_hat)?;
    let sigma_j = sample_covariance(&xj);
    let k_hat = match k {
        KChoice::Fixed(k) => k,
        KChoice::Auto => poet::estimate_k(&sigma_j, poet::default_k_max(n, j_hat.len()))?,
    };
    let fd = poet::poet_decompose(&xj, k_hat)?;

    // ũ: residuals on Ĵ, raw data on Ĵᶜ (covariance centering handles means).
    let mut u_tilde = x.as_matrix().clone();
    for (a, &j) in j_hat.iter().enumerate() {
        u_tilde.set_column(j, &fd.residuals.column(a));
    }
    let u_tilde = DataMatrix::new(u_tilde)?;
    let sigma_u_tilde = sample_covariance(&u_tilde);
    let theta = theta_hat(&u_tilde);

    let spec = ThresholdSpec::adaptive(c, adaptive_omega(j_hat.len(), n, p)).with_rule(rule);
    let sparse = apply_threshold(&sigma_u_tilde, &spec, Some(&theta))?;
    let low_rank = embed_block(p, j_hat, &fd.spike);

    Ok(CovEstimate {
        sigma: low_rank.add(&sparse),
        low_rank,
        sparse,
        k_hat,
        j_hat: Some(j_hat.to_vec()),
        method: MethodKind::PvdPoet,
        diagnostics: Diagnostics {
            elapsed_secs: start.elapsed().as_secs_f64(),
            iterations: 1,
            converged: true,
        },
    })
}

/// Plain entrywise thresholding of the sample covariance (no factor stage);
/// the low-rank part is zero.
pub fn threshold_estimate(x: &DataMatrix, c: f64, rule: ThresholdRule) -> Result<CovEstimate> {
    let start = Instant::now();
    let sigma_hat = sample_covariance(x);
    let spec = ThresholdSpec {
        rule,
        ..ThresholdSpec::universal(c, universal_omega(x.n(), x.p()))
    };
    let sparse = apply_threshold(&sigma_hat, &spec, None)?;
    Ok(CovEstimate {
        sigma: sparse.clone(),
        low_rank: SymMatrix::zeros(x.p()),
        sparse,
        k_hat: 0,
        j_hat: None,
        method: MethodKind::Threshold,
        diagnostics: Diagnostics {
            elapsed_secs: start.elapsed().as_secs_f64(),
            iterations: 1,
            converged: true,
        },
    })
}

impl CovEstimate {
    /// Largest violation of sigma = low_rank + sparse.
    pub fn additivity_error(&self) -> f64 {
        self.sigma.sub(&self.low_rank.add(&self.sparse)).max_abs()
    }

    /// Largest absolute low-rank entry outside the Ĵ×Ĵ block; zero for
    /// estimates without an index set.
    pub fn low_rank_leakage(&self) -> f64 {
        let Some(j) = &self.j_hat else { return 0.0 };
        let p = self.low_rank.dim();
        let mut in_j = vec![false; p];
        for &i in j {
            in_j[i] = true;
        }
        let mut worst = 0.0f64;
        for i in 0..p {
            for k in 0..p {
                if !(in_j[i] && in_j[k]) {
                    worst = worst.max(self.low_rank.get(i, k).abs());
                }
            }
        }
        worst
    }
}
