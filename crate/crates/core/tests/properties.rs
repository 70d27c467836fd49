//! Randomized invariants (proptest).

use nalgebra::DMatrix;
use proptest::prelude::*;
use pvdcov::linalg::{operator_norm, svt, SymMatrix};
use pvdcov::moments::{sample_covariance, theta_hat, DataMatrix};
use pvdcov::pvd::ridge_ratios;
use pvdcov::simlab::screening_metrics;
use pvdcov::thresholding::{apply_threshold, ThresholdSpec};

fn small_data() -> impl Strategy<Value = Vec<Vec<f64>>> {
    // 4..8 rows × 3 columns of moderate values.
    prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 3), 4..8)
}

fn small_sym() -> impl Strategy<Value = Vec<f64>> {
    // Upper triangle (including diagonal) of a 4×4 symmetric matrix.
    prop::collection::vec(-2.0..2.0f64, 10)
}

#[allow(clippy::needless_range_loop)]
fn sym_from_tri(tri: &[f64]) -> SymMatrix {
    let mut it = tri.iter();
    let mut vals = [[0.0f64; 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            let v = *it.next().unwrap();
            vals[i][j] = v;
            vals[j][i] = v;
        }
    }
    SymMatrix::from_fn(4, |i, j| vals[i][j])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn covariance_invariant_under_row_permutation(rows in small_data(), swap in (0usize..4, 0usize..4)) {
        let x = DataMatrix::from_rows(&rows).unwrap();
        let mut shuffled = rows.clone();
        let (a, b) = (swap.0 % rows.len(), swap.1 % rows.len());
        shuffled.swap(a, b);
        let y = DataMatrix::from_rows(&shuffled).unwrap();
        let d = sample_covariance(&x).sub(&sample_covariance(&y)).max_abs();
        prop_assert!(d <= 1e-12);
    }

    #[test]
    fn covariance_invariant_under_column_shift(rows in small_data(), shift in -10.0..10.0f64) {
        let x = DataMatrix::from_rows(&rows).unwrap();
        let mut shifted = rows.clone();
        for r in &mut shifted {
            r[1] += shift;
        }
        let y = DataMatrix::from_rows(&shifted).unwrap();
        let d = sample_covariance(&x).sub(&sample_covariance(&y)).max_abs();
        prop_assert!(d <= 1e-10);
    }

    #[test]
    fn theta_hat_is_nonnegative(rows in small_data()) {
        let x = DataMatrix::from_rows(&rows).unwrap();
        let t = theta_hat(&x);
        for i in 0..x.p() {
            for j in 0..x.p() {
                prop_assert!(t.get(i, j) >= 0.0);
            }
        }
    }

    #[test]
    fn soft_thresholding_is_a_contraction(tri in small_sym(), c in 0.0..2.0f64) {
        let m = sym_from_tri(&tri);
        let spec = ThresholdSpec::universal(c, 0.3);
        let out = apply_threshold(&m, &spec, None).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!(out.get(i, j).abs() <= m.get(i, j).abs() + 1e-15);
                prop_assert_eq!(out.get(i, j).to_bits(), out.get(j, i).to_bits());
            }
        }
    }

    #[test]
    fn svt_shrinks_the_operator_norm(tri in small_sym(), lam in 0.0..1.5f64) {
        let m = sym_from_tri(&tri);
        let out = svt(&m, lam).unwrap();
        let before = operator_norm(&m).unwrap();
        let after = operator_norm(&out).unwrap();
        prop_assert!(after <= before + 1e-10);
        // Exact shrink amount on the top eigenvalue.
        prop_assert!((before - after) <= lam + 1e-10);
    }

    #[test]
    fn ridge_ratios_live_in_unit_interval(mut vals in prop::collection::vec(0.0..10.0f64, 3..12), ridge in 1e-6..1.0f64) {
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let ratios = ridge_ratios(&vals, ridge).unwrap();
        for r in ratios {
            prop_assert!(r > 0.0 && r <= 1.0);
        }
    }

    #[test]
    fn screening_metrics_are_bounded(sets in prop::collection::vec(prop::collection::btree_set(0usize..20, 0..20), 1..6)) {
        let true_j: Vec<usize> = (0..8).collect();
        let j_hats: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let m = screening_metrics(&j_hats, &true_j, 20);
        prop_assert!((0.0..=1.0).contains(&m.eq));
        prop_assert!((0.0..=1.0).contains(&m.fp));
        prop_assert!((0.0..=1.0).contains(&m.fnr));
        prop_assert!(m.mean >= 0.0 && m.mean <= 20.0);
    }

    #[test]
    fn covariance_is_psd_up_to_roundoff(rows in small_data()) {
        let x = DataMatrix::from_rows(&rows).unwrap();
        let s = sample_covariance(&x);
        let eig = pvdcov::linalg::sym_eigen(&s).unwrap();
        let min = eig.values.last().copied().unwrap();
        prop_assert!(min >= -1e-10 * operator_norm(&s).unwrap().max(1.0));
    }
}

#[test]
fn data_matrix_round_trip() {
    let m = DMatrix::from_fn(3, 2, |i, j| (i * 2 + j) as f64);
    let x = DataMatrix::new(m.clone()).unwrap();
    assert_eq!(x.as_matrix(), &m);
}
