//! Entrywise sparse covariance estimation: universal and adaptive
//! (entry-dependent) thresholding, plus the block variant that leaves the
//! detected pivotal block untouched.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{soft, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdMode {
    /// τ_ij = C·ω with a single rate factor ω (typically √(log p / n)).
    Universal,
    /// τ_ij = C·ω·√(θ̂_ij); requires a θ̂ matrix at call time.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ThresholdRule {
    /// sign(x)·max(|x| − τ, 0)
    #[default]
    Soft,
    /// x·1(|x| > τ)
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub mode: ThresholdMode,
    /// Threshold constant C ≥ 0.
    pub constant: f64,
    /// Precomputed rate factor ω ≥ 0.
    pub omega: f64,
    pub rule: ThresholdRule,
    /// Keep the diagonal untouched (variances stay positive).
    pub preserve_diagonal: bool,
}

impl ThresholdSpec {
    pub fn universal(constant: f64, omega: f64) -> Self {
        Self {
            mode: ThresholdMode::Universal,
            constant,
            omega,
            rule: ThresholdRule::Soft,
            preserve_diagonal: true,
        }
    }

    pub fn adaptive(constant: f64, omega: f64) -> Self {
        Self {
            mode: ThresholdMode::Adaptive,
            constant,
            omega,
            rule: ThresholdRule::Soft,
            preserve_diagonal: true,
        }
    }

    pub fn with_rule(mut self, rule: ThresholdRule) -> Self {
        self.rule = rule;
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.constant.is_finite() || self.constant < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "threshold constant must be nonnegative, got {}",
                self.constant
            )));
        }
        if !self.omega.is_finite() || self.omega < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "rate factor omega must be nonnegative, got {}",
                self.omega
            )));
        }
        Ok(())
    }
}

/// Universal rate factor √(log p / n).
pub fn universal_omega(n: usize, p: usize) -> f64 {
    ((p as f64).ln() / n as f64).sqrt()
}

/// Adaptive rate factor ω_n = √(1/s₀) + √(log p / n).
pub fn adaptive_omega(s0: usize, n: usize, p: usize) -> f64 {
    (1.0 / s0 as f64).sqrt() + universal_omega(n, p)
}

fn check_theta<'a>(
    spec: &ThresholdSpec,
    theta: Option<&'a SymMatrix>,
    dim: usize,
) -> Result<Option<&'a SymMatrix>> {
    match (spec.mode, theta) {
        (ThresholdMode::Universal, _) => Ok(None),
        (ThresholdMode::Adaptive, None) => Err(Error::InvalidArgument(
            "adaptive thresholding requires a theta matrix".into(),
        )),
        (ThresholdMode::Adaptive, Some(t)) => {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: t.dim(),
                });
            }
            if t.as_matrix().iter().any(|v| *v < 0.0 || !v.is_finite()) {
                return Err(Error::InvalidInput(
                    "theta entries must be finite and nonnegative".into(),
                ));
            }
            Ok(Some(t))
        }
    }
}

fn shrink(value: f64, tau: f64, rule: ThresholdRule) -> f64 {
    match rule {
        ThresholdRule::Soft => soft(value, tau),
        ThresholdRule::Hard => {
            if value.abs() > tau {
                value
            } else {
                0.0
            }
        }
    }
}

/// Thresholds every entry (diagonal kept when `preserve_diagonal`).
pub fn apply_threshold(
    m: &SymMatrix,
    spec: &ThresholdSpec,
    theta: Option<&SymMatrix>,
) -> Result<SymMatrix> {
    spec.validate()?;
    let theta = check_theta(spec, theta, m.dim())?;
    let base = spec.constant * spec.omega;
    Ok(SymMatrix::from_fn(m.dim(), |i, j| {
        if i == j && spec.preserve_diagonal {
            return m.get(i, j);
        }
        let tau = match theta {
            None => base,
            Some(t) => base * t.get(i, j).sqrt(),
        };
        shrink(m.get(i, j), tau, spec.rule)
    }))
}

/// Thresholds only entries with i ∉ Ĵ or j ∉ Ĵ; the Ĵ×Ĵ block passes through
/// unchanged for the factor-stage estimator to overwrite. The diagonal of
/// the complement block is preserved when `preserve_diagonal`.
pub fn threshold_blocks(
    sigma_hat: &SymMatrix,
    j_hat: &[usize],
    spec: &ThresholdSpec,
    theta: Option<&SymMatrix>,
) -> Result<SymMatrix> {
    spec.validate()?;
    let p = sigma_hat.dim();
    if let Some(&bad) = j_hat.iter().find(|&&i| i >= p) {
        return Err(Error::InvalidArgument(format!(
            "index {bad} out of range for dimension {p}"
        )));
    }
    let theta = check_theta(spec, theta, p)?;
    let mut in_j = vec![false; p];
    for &i in j_hat {
        in_j[i] = true;
    }
    let base = spec.constant * spec.omega;
    Ok(SymMatrix::from_fn(p, |i, j| {
        if in_j[i] && in_j[j] {
            return sigma_hat.get(i, j);
        }
        if i == j && spec.preserve_diagonal {
            return sigma_hat.get(i, j);
        }
        let tau = match theta {
            None => base,
            Some(t) => base * t.get(i, j).sqrt(),
        };
        shrink(sigma_hat.get(i, j), tau, spec.rule)
    }))
}

/// Optional post-step for thresholded estimates (off by default, since the
/// reference procedures report raw estimates): floors eigenvalues at
/// `floor` to repair indefiniteness introduced by entrywise thresholding.
pub fn pd_repair(m: &SymMatrix, floor: f64) -> Result<SymMatrix> {
    if !floor.is_finite() || floor <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "pd_repair floor must be positive, got {floor}"
        )));
    }
    let eig = crate::linalg::sym_eigen(m)?;
    if eig.values.last().copied().unwrap_or(0.0) >= floor {
        return Ok(m.clone());
    }
    let floored: Vec<f64> = eig.values.iter().map(|&l| l.max(floor)).collect();
    Ok(eig.reconstruct_with(&floored))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_sym(p: usize, seed: u64) -> SymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SymMatrix::from_fn(p, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn zero_tau_is_identity() {
        let m = random_sym(4, 1);
        let spec = ThresholdSpec::universal(0.0, 0.7);
        let out = apply_threshold(&m, &spec, None).unwrap();
        assert_eq!(out, m);
    }

    #[test]
    fn soft_rule_definition() {
        let m = SymMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 0.5 });
        let spec = ThresholdSpec::universal(1.0, 0.2);
        let out = apply_threshold(&m, &spec, None).unwrap();
        assert!((out.get(0, 1) - 0.3).abs() < 1e-15);
        assert_eq!(out.get(0, 0), 1.0);

        let m2 = SymMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { -0.1 });
        let out2 = apply_threshold(&m2, &spec, None).unwrap();
        assert_eq!(out2.get(0, 1), 0.0);
    }

    #[test]
    fn hard_rule_keeps_or_kills() {
        let m = SymMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 0.5 });
        let spec = ThresholdSpec::universal(1.0, 0.2).with_rule(ThresholdRule::Hard);
        let out = apply_threshold(&m, &spec, None).unwrap();
        assert_eq!(out.get(0, 1), 0.5);
        let spec2 = ThresholdSpec::universal(1.0, 0.6).with_rule(ThresholdRule::Hard);
        let out2 = apply_threshold(&m, &spec2, None).unwrap();
        assert_eq!(out2.get(0, 1), 0.0);
    }

    #[test]
    fn adaptive_matches_entrywise_loop() {
        let m = random_sym(4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let theta = SymMatrix::from_fn(4, |_, _| rng.random_range(0.0..2.0));
        let spec = ThresholdSpec::adaptive(0.5, 1.0);
        let out = apply_threshold(&m, &spec, Some(&theta)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j {
                    m.get(i, j)
                } else {
                    let tau = 0.5 * theta.get(i, j).sqrt();
                    soft(m.get(i, j), tau)
                };
                assert!((out.get(i, j) - want).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn adaptive_requires_theta() {
        let m = random_sym(3, 4);
        let spec = ThresholdSpec::adaptive(0.5, 1.0);
        assert!(matches!(
            apply_threshold(&m, &spec, None),
            Err(Error::InvalidArgument(_))
        ));
        let bad = SymMatrix::from_fn(3, |i, j| if i == j { -1.0 } else { 0.0 });
        assert!(matches!(
            apply_threshold(&m, &spec, Some(&bad)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn blocks_full_j_is_identity() {
        let m = random_sym(5, 5);
        let spec = ThresholdSpec::universal(0.5, 10.0);
        let out = threshold_blocks(&m, &[0, 1, 2, 3, 4], &spec, None).unwrap();
        assert_eq!(out, m);
    }

    #[test]
    fn blocks_empty_j_equals_apply() {
        let m = random_sym(5, 6);
        let spec = ThresholdSpec::universal(0.5, 0.4);
        let blocks = threshold_blocks(&m, &[], &spec, None).unwrap();
        let plain = apply_threshold(&m, &spec, None).unwrap();
        assert_eq!(blocks, plain);
    }

    #[test]
    fn blocks_leave_jj_untouched() {
        let p = 6usize;
        let m = random_sym(p, 7);
        let j = [0usize, 1];
        let spec = ThresholdSpec::universal(1.0, 0.3);
        let out = threshold_blocks(&m, &j, &spec, None).unwrap();
        for i in 0..p {
            for k in 0..p {
                let untouched = (j.contains(&i) && j.contains(&k)) || i == k;
                let want = if untouched {
                    m.get(i, k)
                } else {
                    soft(m.get(i, k), 0.3)
                };
                assert!((out.get(i, k) - want).abs() <= 1e-14, "({i},{k})");
            }
        }
        assert!(threshold_blocks(&m, &[99], &spec, None).is_err());
    }

    #[test]
    fn sparsity_monotone_in_constant() {
        let m = random_sym(8, 8);
        let omega = 0.3;
        let mut prev = usize::MAX;
        for c in [0.0, 0.25, 0.5, 1.0, 2.0] {
            let spec = ThresholdSpec::universal(c, omega);
            let out = apply_threshold(&m, &spec, None).unwrap();
            let nnz = (0..8)
                .flat_map(|i| (0..8).map(move |j| (i, j)))
                .filter(|&(i, j)| i != j && out.get(i, j) != 0.0)
                .count();
            assert!(nnz <= prev);
            prev = nnz;
        }
    }

    #[test]
    fn pd_repair_floors_negative_eigenvalues() {
        // Hard-thresholded band with a zero diagonal is indefinite.
        let m = SymMatrix::from_fn(4, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
        let repaired = pd_repair(&m, 1e-8).unwrap();
        let eig = crate::linalg::sym_eigen(&repaired).unwrap();
        assert!(*eig.values.last().unwrap() >= 1e-8 - 1e-12);
        // PD input with the floor below its spectrum passes through.
        let id = SymMatrix::identity(3);
        assert_eq!(pd_repair(&id, 1e-8).unwrap(), id);
        assert!(pd_repair(&id, 0.0).is_err());
    }

    #[test]
    fn omega_formulas() {
        let n = 150usize;
        let p = 100usize;
        assert!((universal_omega(n, p) - ((100.0f64).ln() / 150.0).sqrt()).abs() < 1e-15);
        let want = (1.0f64 / 20.0).sqrt() + ((100.0f64).ln() / 150.0).sqrt();
        assert!((adaptive_omega(20, n, p) - want).abs() < 1e-15);
    }
}
