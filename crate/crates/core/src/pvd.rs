//! Pivotal-variable detection: row-energy screening statistic, ridge-ratio
//! estimate of the pivotal count s₀(p), and the detected index set Ĵ.
//!
//! A variable is pivotal when its row of the covariance matrix is dense;
//! the per-row energy r̂_i = p⁻¹ Σ_j σ̂_ij² separates dense from sparse rows,
//! and the first minimum of the ridged ratio R_i = (r̂_(i+1)+l)/(r̂_(i)+l)
//! over the descending order estimates how many such rows there are.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::moments::{sample_covariance, DataMatrix};

/// Ridge value l_n added to both numerator and denominator of the ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Ridge {
    /// l_n = [(log p)⁵ / n]^{3/8}, natural logarithm.
    Auto,
    Fixed(f64),
}

/// Tie-breaking rule for the argmin over ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TieBreak {
    /// First (smallest) index attaining the minimum; favors fewer pivotal
    /// variables.
    #[default]
    SmallestIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvdConfig {
    pub ridge: Ridge,
    pub tie_break: TieBreak,
}

impl Default for PvdConfig {
    fn default() -> Self {
        Self {
            ridge: Ridge::Auto,
            tie_break: TieBreak::SmallestIndex,
        }
    }
}

impl PvdConfig {
    /// Resolves the ridge for a given sample size and dimension.
    pub fn ridge_value(&self, n: usize, p: usize) -> f64 {
        match self.ridge {
            Ridge::Fixed(l) => l,
            Ridge::Auto => ((p as f64).ln().powi(5) / n as f64).powf(3.0 / 8.0),
        }
    }
}

/// Screening output.
#[derive(Debug, Clone, Serialize)]
pub struct PvdResult {
    /// r̂_i for every variable, original order.
    pub r_hat: Vec<f64>,
    /// Permutation sorting r̂ descending (ties: smaller index first).
    pub order: Vec<usize>,
    /// Ridge ratios R_1..R_{p-1} along the descending order.
    pub ratios: Vec<f64>,
    /// Estimated pivotal count ŝ₀(p), in 1..=p−1.
    pub s0_hat: usize,
    /// Detected index set Ĵ: the ŝ₀ variables of largest r̂, ascending.
    pub j_hat: Vec<usize>,
    /// Ridge actually used.
    pub ridge: f64,
}

/// r̂_i = p⁻¹ Σ_j σ̂_ij², diagonal included.
pub fn row_energy(sigma_hat: &SymMatrix) -> Vec<f64> {
    let p = sigma_hat.dim();
    let m = sigma_hat.as_matrix();
    (0..p)
        .map(|i| m.row(i).iter().map(|v| v * v).sum::<f64>() / p as f64)
        .collect()
}

/// R_i = (r_(i+1) + l) / (r_(i) + l) for a non-increasing nonnegative input.
pub fn ridge_ratios(r_sorted_desc: &[f64], ridge: f64) -> Result<Vec<f64>> {
    if !ridge.is_finite() || ridge <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "ridge must be a positive real, got {ridge}"
        )));
    }
    if r_sorted_desc.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "row energies must be finite and nonnegative".into(),
        ));
    }
    if r_sorted_desc.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument(
            "row energies must be sorted non-increasing".into(),
        ));
    }
    Ok(r_sorted_desc
        .windows(2)
        .map(|w| (w[1] + ridge) / (w[0] + ridge))
        .collect())
}

/// First index attaining the minimum.
fn argmin_first(values: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Runs detection on raw data (sample covariance computed internally).
pub fn detect(x: &DataMatrix, cfg: &PvdConfig) -> PvdResult {
    let sigma = sample_covariance(x);
    detect_from_cov(&sigma, x.n(), cfg)
}

/// Runs detection on a precomputed covariance matrix; `n` is only used to
/// resolve an automatic ridge.
pub fn detect_from_cov(sigma_hat: &SymMatrix, n: usize, cfg: &PvdConfig) -> PvdResult {
    let p = sigma_hat.dim();
    let r_hat = row_energy(sigma_hat);

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| r_hat[b].partial_cmp(&r_hat[a]).unwrap().then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| r_hat[i]).collect();

    let ridge = cfg.ridge_value(n, p);
    let ratios = ridge_ratios(&sorted, ridge).expect("sorted by construction");

    // argmin over 1..=p−1; ŝ₀ is 1-based, TieBreak::SmallestIndex.
    let s0_hat = argmin_first(&ratios) + 1;

    let mut j_hat: Vec<usize> = order[..s0_hat].to_vec();
    j_hat.sort_unstable();

    PvdResult {
        r_hat,
        order,
        ratios,
        s0_hat,
        j_hat,
        ridge,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_energy_identity() {
        let r = row_energy(&SymMatrix::identity(4));
        for v in r {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn row_energy_hand_case() {
        let m = SymMatrix::from_fn(2, |i, j| [[2.0, 1.0], [1.0, 3.0]][i][j]);
        let r = row_energy(&m);
        assert!((r[0] - 2.5).abs() < 1e-15);
        assert!((r[1] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn row_energy_matches_double_loop() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let m = SymMatrix::from_fn(10, |_, _| rng.random_range(-1.0..1.0));
        let r = row_energy(&m);
        for (i, &ri) in r.iter().enumerate() {
            let mut acc = 0.0;
            for j in 0..10 {
                acc += m.get(i, j) * m.get(i, j);
            }
            assert!((ri - acc / 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ratios_hand_case() {
        let r = [5.0, 4.0, 0.001, 0.0008, 0.0005];
        let rat = ridge_ratios(&r, 0.01).unwrap();
        let expect = [4.01 / 5.01, 0.011 / 4.01, 0.0108 / 0.011, 0.0105 / 0.0108];
        for (a, b) in rat.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((rat[0] - 0.8004).abs() < 1e-4);
        assert!((rat[1] - 0.00274).abs() < 1e-5);
        assert!((rat[2] - 0.9818).abs() < 1e-4);
        assert!((rat[3] - 0.9722).abs() < 1e-4);
        assert_eq!(argmin_first(&rat) + 1, 2);
    }

    #[test]
    fn ratios_all_equal_are_one() {
        let rat = ridge_ratios(&[2.0, 2.0, 2.0], 0.5).unwrap();
        for v in rat {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn ratios_simple_half() {
        let rat = ridge_ratios(&[1.0, 0.0], 1.0).unwrap();
        assert_eq!(rat, vec![0.5]);
    }

    #[test]
    fn ratios_reject_unsorted_and_bad_ridge() {
        assert!(ridge_ratios(&[1.0, 2.0], 0.1).is_err());
        assert!(ridge_ratios(&[1.0, 0.5], 0.0).is_err());
        assert!(ridge_ratios(&[1.0, -0.5], 0.1).is_err());
        // In-range ratios always lie in (0, 1].
        let rat = ridge_ratios(&[3.0, 1.0, 0.2, 0.0], 1e-3).unwrap();
        for v in rat {
            assert!(v > 0.0 && v <= 1.0);
        }
    }

    #[test]
    fn detect_recovers_engineered_energies() {
        // Diagonal Σ̂ with diag d_i = sqrt(r_i · p) gives r̂ exactly.
        let p = 5usize;
        let r = [5.0, 4.0, 0.001, 0.0008, 0.0005];
        let diag: Vec<f64> = r.iter().map(|v| (v * p as f64).sqrt()).collect();
        let sigma = SymMatrix::from_diagonal(&diag);
        let cfg = PvdConfig {
            ridge: Ridge::Fixed(0.01),
            ..Default::default()
        };
        let res = detect_from_cov(&sigma, 100, &cfg);
        assert_eq!(res.s0_hat, 2);
        assert_eq!(res.j_hat, vec![0, 1]);
        assert_eq!(res.order[..2], [0, 1]);
        for (a, b) in res.r_hat.iter().zip(r.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn detect_tie_break_picks_one() {
        // All-equal energies: every ratio is 1, argmin lands on the first.
        let sigma = SymMatrix::identity(6);
        let res = detect_from_cov(&sigma, 50, &PvdConfig::default());
        assert_eq!(res.s0_hat, 1);
        assert_eq!(res.j_hat, vec![0]);
    }

    #[test]
    fn auto_ridge_formula() {
        let cfg = PvdConfig::default();
        let n = 100usize;
        let p = 400usize;
        let want = ((400.0f64).ln().powi(5) / 100.0).powf(0.375);
        assert!((cfg.ridge_value(n, p) - want).abs() < 1e-15);
    }
}
