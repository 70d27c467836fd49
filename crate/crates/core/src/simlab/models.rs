//! Generative covariance models for the simulation grids.
//!
//! Three families are provided, all sampled as X = Z·F with Z i.i.d.
//! standard normal rows and F a fixed p×p factor of the true covariance:
//!
//! * `Model1` — Σ = Σ₀² for a structured, possibly indefinite Σ₀; sampling
//!   uses F = Σ₀ directly so cov(X) = Σ₀² exactly.
//! * `Model2` — Σ = BBᵀ + Σ_u with a p×4 loading block of N(1+ρ, 0.5)
//!   entries and a banded Toeplitz Σ_u, σ_u,ij = ρ^{|i−j|/9}·1(|i−j| < 9).
//! * `Factor62` — Σ = BBᵀ + Σ_u with p×2 loadings drawn uniformly on the
//!   unit circle for the first p₁ rows and a block-banded Σ_u whose J×J
//!   block is scaled by the signal level r.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal, UnitCircle};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, SymMatrix};
use crate::moments::DataMatrix;

/// Stream tag reserved for drawing the truth (loadings, random index sets);
/// replica streams use the replica index, so adding replicas never perturbs
/// the truth or earlier replicas.
const TRUTH_STREAM: u64 = u64::MAX;

/// splitmix64-style mixing of a base seed and a stream index.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelFamily {
    Model1,
    Model2,
    Factor62,
}

impl ModelFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelFamily::Model1 => "1",
            ModelFamily::Model2 => "2",
            ModelFamily::Factor62 => "factor62",
        }
    }
}

/// Auditing switches for formula variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModelOptions {
    /// Factor62 only: use the literal band indicator 1(|i−j| > 5), which
    /// zeroes the diagonal of Σ_u and forces a PSD repair. The default is
    /// the banded reading 1(|i−j| ≤ 5).
    pub band_literal: bool,
    /// Model2 only: read N(1+ρ, 0.5)'s second parameter as the standard
    /// deviation instead of the variance.
    pub loading_sd_literal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: ModelFamily,
    pub p: usize,
    pub p1: usize,
    /// ρ for Models 1–2, r for Factor62.
    pub signal: f64,
    pub n: usize,
    pub seed: u64,
    pub options: ModelOptions,
}

impl ModelSpec {
    pub fn model1(p: usize, p1: usize, rho: f64, n: usize, seed: u64) -> Self {
        Self {
            family: ModelFamily::Model1,
            p,
            p1,
            signal: rho,
            n,
            seed,
            options: ModelOptions::default(),
        }
    }

    pub fn model2(p: usize, p1: usize, rho: f64, n: usize, seed: u64) -> Self {
        Self {
            family: ModelFamily::Model2,
            p,
            p1,
            signal: rho,
            n,
            seed,
            options: ModelOptions::default(),
        }
    }

    pub fn factor62(p: usize, p1: usize, r: f64, n: usize, seed: u64) -> Self {
        Self {
            family: ModelFamily::Factor62,
            p,
            p1,
            signal: r,
            n,
            seed,
            options: ModelOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p1 < 1 || self.p1 >= self.p {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= p1 < p, got p1={}, p={}",
                self.p1, self.p
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!(
                "need n >= 2, got {}",
                self.n
            )));
        }
        match self.family {
            ModelFamily::Model1 => {
                if !self.signal.is_finite() || self.signal <= 0.0 || self.signal > 1.0 {
                    return Err(Error::InvalidArgument(format!(
                        "Model1 needs rho in (0, 1], got {}",
                        self.signal
                    )));
                }
                if self.p - self.p1 < MODEL1_TILDE_SIZE {
                    return Err(Error::InvalidArgument(format!(
                        "Model1 needs p - p1 >= {MODEL1_TILDE_SIZE} for the random dense subset"
                    )));
                }
            }
            ModelFamily::Model2 => {
                if !self.signal.is_finite() || self.signal <= 0.0 || self.signal > 1.0 {
                    return Err(Error::InvalidArgument(format!(
                        "Model2 needs rho in (0, 1], got {}",
                        self.signal
                    )));
                }
            }
            ModelFamily::Factor62 => {
                if !self.signal.is_finite() || self.signal <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "Factor62 needs r > 0, got {}",
                        self.signal
                    )));
                }
            }
        }
        Ok(())
    }

    /// True pivotal index set J = {0, ..., p₁−1}.
    pub fn true_j(&self) -> Vec<usize> {
        (0..self.p1).collect()
    }
}

/// Number of randomly placed dense coordinates in Model 1's complement block.
const MODEL1_TILDE_SIZE: usize = 30;

/// Ground truth of a generated model.
#[derive(Debug, Clone)]
pub struct SigmaTruth {
    pub sigma: SymMatrix,
    /// Idiosyncratic covariance; absent for Model 1, which has no
    /// low-rank/sparse split.
    pub sigma_u: Option<SymMatrix>,
    /// Loading matrix B; absent for Model 1.
    pub loadings: Option<DMatrix<f64>>,
    pub true_j: Vec<usize>,
    /// True if the construction needed the eigenvalue-floor PSD repair.
    pub psd_repaired: bool,
}

fn truth_rng(spec: &ModelSpec) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, TRUTH_STREAM))
}

fn build_model1(spec: &ModelSpec) -> (SigmaTruth, DMatrix<f64>) {
    let p = spec.p;
    let p1 = spec.p1;
    let rho = spec.signal;
    let mut rng = truth_rng(spec);
    let picked = rand::seq::index::sample(&mut rng, p - p1, MODEL1_TILDE_SIZE);
    let mut in_tilde = vec![false; p];
    for k in picked.iter() {
        in_tilde[p1 + k] = true;
    }
    // Entry formulas are stated for 1-based indices.
    let sigma0 = SymMatrix::from_fn(p, |i0, j0| {
        let (i, j) = ((i0 + 1) as f64, (j0 + 1) as f64);
        let in_j = |k: usize| k < p1;
        if in_j(i0) && in_j(j0) {
            rho.powf(2.0 * i.min(j) / p1 as f64)
        } else if in_j(i0) || in_j(j0) {
            rho.powf(i.min(j) / p1 as f64) * 0.1f64.powf(2.0 * i.max(j) / p as f64)
        } else if in_tilde[i0] && in_tilde[j0] {
            rho
        } else {
            0.0
        }
    });
    let sigma = SymMatrix::from_fn(p, {
        let prod = sigma0.as_matrix() * sigma0.as_matrix();
        move |i, j| prod[(i, j)]
    });
    let factor = sigma0.into_matrix();
    (
        SigmaTruth {
            sigma,
            sigma_u: None,
            loadings: None,
            true_j: spec.true_j(),
            psd_repaired: false,
        },
        factor,
    )
}

fn band_value(d: usize, base: f64, literal: bool) -> f64 {
    let keep = if literal { d > 5 } else { d <= 5 };
    if keep {
        base.powi(d as i32)
    } else {
        0.0
    }
}

fn build_model2(spec: &ModelSpec) -> SigmaTruth {
    let p = spec.p;
    let p1 = spec.p1;
    let rho = spec.signal;
    let sd = if spec.options.loading_sd_literal {
        0.5
    } else {
        0.5f64.sqrt()
    };
    let mut rng = truth_rng(spec);
    let normal = Normal::new(1.0 + rho, sd).expect("valid normal");
    // Column-major fill order for reproducibility.
    let mut loadings = DMatrix::<f64>::zeros(p, 4);
    for j in 0..4 {
        for i in 0..p1 {
            loadings[(i, j)] = normal.sample(&mut rng);
        }
    }
    let sigma_u = SymMatrix::from_fn(p, |i, j| {
        let d = i.abs_diff(j);
        if d < 9 {
            rho.powf(d as f64 / 9.0)
        } else {
            0.0
        }
    });
    let bbt = &loadings * loadings.transpose();
    let sigma = SymMatrix::from_fn(p, |i, j| bbt[(i, j)] + sigma_u.get(i, j));
    SigmaTruth {
        sigma,
        sigma_u: Some(sigma_u),
        loadings: Some(loadings),
        true_j: spec.true_j(),
        psd_repaired: false,
    }
}

fn build_factor62(spec: &ModelSpec) -> SigmaTruth {
    let p = spec.p;
    let p1 = spec.p1;
    let r = spec.signal;
    let literal = spec.options.band_literal;
    let mut rng = truth_rng(spec);
    let mut loadings = DMatrix::<f64>::zeros(p, 2);
    for i in 0..p1 {
        let point: [f64; 2] = UnitCircle.sample(&mut rng);
        loadings[(i, 0)] = point[0];
        loadings[(i, 1)] = point[1];
    }
    let sigma_u = SymMatrix::from_fn(p, |i, j| {
        let d = i.abs_diff(j);
        if i < p1 && j < p1 {
            r * band_value(d, 0.3, literal)
        } else if i >= p1 && j >= p1 {
            band_value(d, 0.3, literal)
        } else {
            0.0
        }
    });
    let bbt = &loadings * loadings.transpose();
    let sigma = SymMatrix::from_fn(p, |i, j| bbt[(i, j)] + sigma_u.get(i, j));
    SigmaTruth {
        sigma,
        sigma_u: Some(sigma_u),
        loadings: Some(loadings),
        true_j: spec.true_j(),
        psd_repaired: false,
    }
}

/// Builds the exact entry formulas of the requested family; a non-PSD
/// result (possible only under auditing switches) is repaired by flooring
/// eigenvalues at 1e-8 and flagged in the output.
pub fn build_sigma(spec: &ModelSpec) -> Result<SigmaTruth> {
    Ok(built_with_factor(spec)?.0)
}

fn built_with_factor(spec: &ModelSpec) -> Result<(SigmaTruth, DMatrix<f64>)> {
    spec.validate()?;
    let mut truth = match spec.family {
        ModelFamily::Model1 => {
            // Σ = Σ₀² is PSD by construction and F = Σ₀ reproduces it exactly.
            let (truth, factor) = build_model1(spec);
            return Ok((truth, factor));
        }
        ModelFamily::Model2 => build_model2(spec),
        ModelFamily::Factor62 => build_factor62(spec),
    };

    let eig = sym_eigen(&truth.sigma)?;
    let min_eig = eig.values.last().copied().unwrap_or(0.0);
    if min_eig < -1e-8 {
        let floored: Vec<f64> = eig.values.iter().map(|&l| l.max(1e-8)).collect();
        truth.sigma = eig.reconstruct_with(&floored);
        truth.psd_repaired = true;
        let recheck = sym_eigen(&truth.sigma)?;
        if recheck.values.last().copied().unwrap_or(0.0) < -1e-8 {
            return Err(Error::Generator(
                "covariance not positive semidefinite after repair".into(),
            ));
        }
    }
    // Symmetric PSD square root from the (possibly repaired) spectrum.
    let weights: Vec<f64> = if truth.psd_repaired {
        eig.values.iter().map(|&l| l.max(1e-8).sqrt()).collect()
    } else {
        eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect()
    };
    let root = eig.reconstruct_with(&weights).into_matrix();
    Ok((truth, root))
}

/// Seeded sampler; builds the truth and the sampling factor once.
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: ModelSpec,
    truth: SigmaTruth,
    factor: DMatrix<f64>,
}

impl Sampler {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let (truth, factor) = built_with_factor(&spec)?;
        Ok(Self {
            spec,
            truth,
            factor,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn truth(&self) -> &SigmaTruth {
        &self.truth
    }

    /// The matrix F with X = Z·F; Σ₀ itself for Model 1, the symmetric PSD
    /// square root of Σ otherwise.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Draws replica `t`: Z is filled in column-major order from
    /// ChaCha8(mix_seed(seed, t)).
    pub fn sample(&self, replica: u64) -> DataMatrix {
        let n = self.spec.n;
        let p = self.spec.p;
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.spec.seed, replica));
        let mut z = DMatrix::<f64>::zeros(n, p);
        for j in 0..p {
            for i in 0..n {
                z[(i, j)] = StandardNormal.sample(&mut rng);
            }
        }
        let x = z * &self.factor;
        DataMatrix::new(x).expect("generated data is finite")
    }
}

/// One-shot convenience wrapper around [`Sampler`].
pub fn sample(spec: &ModelSpec, replica: u64) -> Result<DataMatrix> {
    Ok(Sampler::new(*spec)?.sample(replica))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::sample_covariance;

    #[test]
    fn model2_unit_diagonal_band() {
        let spec = ModelSpec::model2(30, 10, 0.7, 50, 9);
        let truth = build_sigma(&spec).unwrap();
        let su = truth.sigma_u.unwrap();
        for i in 0..30 {
            assert_eq!(su.get(i, i), 1.0);
        }
        // Band edge: |i−j| = 8 present, 9 absent.
        assert!((su.get(0, 8) - 0.7f64.powf(8.0 / 9.0)).abs() < 1e-15);
        assert_eq!(su.get(0, 9), 0.0);
    }

    #[test]
    fn model1_sigma_is_square_of_factor() {
        let spec = ModelSpec::model1(60, 10, 0.5, 40, 3);
        let s = Sampler::new(spec).unwrap();
        let f = s.factor();
        let sq = f * f;
        let err = (sq - s.truth().sigma.as_matrix()).norm();
        assert!(err <= 1e-12 * s.truth().sigma.frobenius_norm().max(1.0));
        // PSD: min eigenvalue of Σ = Σ₀² is a square.
        let eig = sym_eigen(&s.truth().sigma).unwrap();
        assert!(*eig.values.last().unwrap() >= -1e-8);
        assert!(!s.truth().psd_repaired);
    }

    #[test]
    fn factor62_rows_on_unit_circle() {
        let spec = ModelSpec::factor62(40, 15, 0.5, 50, 4);
        let truth = build_sigma(&spec).unwrap();
        let b = truth.loadings.unwrap();
        for i in 0..15 {
            let norm = (b[(i, 0)].powi(2) + b[(i, 1)].powi(2)).sqrt();
            assert!((norm - 1.0).abs() <= 1e-12, "row {i}: {norm}");
        }
        for i in 15..40 {
            assert_eq!(b[(i, 0)], 0.0);
            assert_eq!(b[(i, 1)], 0.0);
        }
        // J×J band carries the signal scale, cross block is zero.
        let su = truth.sigma_u.unwrap();
        assert_eq!(su.get(0, 0), 0.5);
        assert_eq!(su.get(20, 20), 1.0);
        assert!((su.get(0, 3) - 0.5 * 0.3f64.powi(3)).abs() < 1e-15);
        assert_eq!(su.get(14, 15), 0.0);
        assert_eq!(su.get(0, 6), 0.0);
        assert!(!truth.psd_repaired);
    }

    #[test]
    fn band_literal_triggers_repair() {
        let mut spec = ModelSpec::factor62(25, 8, 0.5, 50, 4);
        spec.options.band_literal = true;
        let truth = build_sigma(&spec).unwrap();
        // Literal indicator zeroes the Σ_u diagonal, making Σ indefinite
        // before the floor repair.
        assert_eq!(truth.sigma_u.as_ref().unwrap().get(10, 10), 0.0);
        assert!(truth.psd_repaired);
        let eig = sym_eigen(&truth.sigma).unwrap();
        assert!(*eig.values.last().unwrap() >= -1e-8);
    }

    #[test]
    fn sampling_is_deterministic_per_replica() {
        let spec = ModelSpec::model2(20, 5, 0.5, 15, 77);
        let s = Sampler::new(spec).unwrap();
        let a = s.sample(3);
        let b = s.sample(3);
        assert_eq!(a, b);
        let c = s.sample(4);
        assert_ne!(a, c);
    }

    #[test]
    fn empirical_covariance_approaches_truth() {
        let spec = ModelSpec::model2(10, 4, 0.5, 10_000, 5);
        let s = Sampler::new(spec).unwrap();
        let x = s.sample(0);
        let emp = sample_covariance(&x);
        let rel = emp.sub(&s.truth().sigma).frobenius_norm() / s.truth().sigma.frobenius_norm();
        assert!(rel < 0.1, "relative error {rel}");
    }

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(ModelSpec::model2(10, 10, 0.5, 20, 0).validate().is_err());
        assert!(ModelSpec::model2(10, 0, 0.5, 20, 0).validate().is_err());
        assert!(ModelSpec::model2(10, 5, 1.5, 20, 0).validate().is_err());
        assert!(ModelSpec::model1(35, 10, 0.5, 20, 0).validate().is_err()); // p−p1 < 30
        assert!(ModelSpec::factor62(10, 5, -0.1, 20, 0).validate().is_err());
        assert!(ModelSpec::factor62(10, 5, 0.5, 1, 0).validate().is_err());
    }

    #[test]
    fn mix_seed_streams_are_distinct() {
        let a = mix_seed(42, 0);
        let b = mix_seed(42, 1);
        let c = mix_seed(43, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(mix_seed(42, 0), a);
    }
}
