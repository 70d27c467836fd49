//! End-to-end acceptance checks behind the `selftest` CLI command and the
//! `acceptance` integration-test target.
//!
//! Each criterion pins its grid, tolerances and runtime cap in code and
//! reports one pass/fail line. Monte-Carlo checks gate orderings and
//! trends (published absolute values are reported, not gated); the
//! formula-level suite checks estimators against independent oracles
//! computed here (double loops, a local Jacobi eigensolver, a proximal-
//! gradient reference solver).

use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::{soft, svt, SymMatrix};
use crate::lorec::{self, LorecConfig};
use crate::moments::{sample_covariance, theta_hat, DataMatrix};
use crate::pipeline::{pvd_lorec_with_index_set, pvd_poet_with_index_set};
use crate::poet::{poet_estimate, KChoice};
use crate::pvd::{detect, row_energy, PvdConfig};
use crate::simlab::{
    estimation_csv, eu_metric, mix_seed, re_metric, reports_to_json, run_experiment, screening_csv,
    Cell, ExperimentReport, Method, ModelSpec,
};
use crate::thresholding::ThresholdSpec;

/// Default master seed for the acceptance suite.
pub const DEFAULT_SEED: u64 = 17;

/// Step-3 universal threshold constant used by the Table-2 comparison and
/// the table2 command. The module-wide default C = 0.5 places τ below the
/// cross-block noise scale √(σ_ii σ_jj / n) at these (n, p), which floods
/// the off-blocks with kept noise; C = 1.0 puts τ at the noise scale.
pub const TABLE2_UNIVERSAL_C: f64 = 1.0;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub details: String,
    pub secs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub outcomes: Vec<CriterionOutcome>,
    pub all_passed: bool,
}

fn finish(
    out: &mut Vec<CriterionOutcome>,
    id: &'static str,
    title: &'static str,
    started: Instant,
    passed: bool,
    details: String,
) {
    let secs = started.elapsed().as_secs_f64();
    println!(
        "[{}] {id} {title}: {details} ({secs:.1}s)",
        if passed { "PASS" } else { "FAIL" }
    );
    out.push(CriterionOutcome {
        id,
        title,
        passed,
        details,
        secs,
    });
}

fn screening_cell(spec: ModelSpec, t: usize, workers: Option<usize>) -> ExperimentReport {
    let cell = Cell {
        model: spec,
        methods: vec![Method::Pvd(PvdConfig::default())],
    };
    run_experiment(&[cell], t, workers)
        .expect("screening cell runs")
        .remove(0)
}

/// C1: Model 2 screening accuracy at p=400, p1=50, n=100, ρ=0.9, T=30.
fn c1(out: &mut Vec<CriterionOutcome>, seed: u64, workers: Option<usize>) {
    let t0 = Instant::now();
    let rep = screening_cell(
        ModelSpec::model2(400, 50, 0.9, 100, mix_seed(seed, 1)),
        30,
        workers,
    );
    let s = rep.screening.as_ref().expect("screening metrics");
    let within_time = t0.elapsed().as_secs_f64() <= 120.0;
    let passed = s.eq >= 0.9 && s.fp <= 0.001 && s.fnr <= 0.02 && within_time;
    finish(
        out,
        "C1",
        "PVD screening, Model 2 (p=400, p1=50, n=100, rho=0.9, T=30)",
        t0,
        passed,
        format!(
            "EQ={:.3} (>=0.9), FP={:.5} (<=0.001), FN={:.5} (<=0.02), runtime<=120s={}",
            s.eq, s.fp, s.fnr, within_time
        ),
    );
}

/// C2: Model 1 accuracy at ρ=0.9 plus the EQ(ρ=0.1) ≤ EQ(ρ=0.5) trend for
/// both models.
fn c2(out: &mut Vec<CriterionOutcome>, seed: u64, workers: Option<usize>) {
    let t0 = Instant::now();
    let eq = |family: u8, rho: f64, stream: u64| {
        let spec = match family {
            1 => ModelSpec::model1(400, 50, rho, 100, mix_seed(seed, stream)),
            _ => ModelSpec::model2(400, 50, rho, 100, mix_seed(seed, stream)),
        };
        screening_cell(spec, 30, workers)
            .screening
            .expect("metrics")
            .eq
    };
    let m1_09 = eq(1, 0.9, 2);
    let m1_01 = eq(1, 0.1, 3);
    let m1_05 = eq(1, 0.5, 4);
    let m2_01 = eq(2, 0.1, 5);
    let m2_05 = eq(2, 0.5, 6);
    let passed = m1_09 >= 0.9 && m1_01 <= m1_05 && m2_01 <= m2_05;
    finish(
        out,
        "C2",
        "PVD screening, Model 1 level and rho-monotonicity (both models)",
        t0,
        passed,
        format!(
            "M1 EQ(0.9)={m1_09:.3} (>=0.9); trend M1 {m1_01:.3}<={m1_05:.3}, M2 {m2_01:.3}<={m2_05:.3}"
        ),
    );
}

/// C3: P(ŝ0 = s0) non-decreasing over n ∈ {50,100,200} (one inversion of
/// at most 0.05 allowed), Model 2 at p=400, p1=50, ρ=0.5, T=30.
fn c3(out: &mut Vec<CriterionOutcome>, seed: u64, workers: Option<usize>) {
    let t0 = Instant::now();
    let mut probs = Vec::new();
    // One fixed instance: the truth stream depends only on the spec seed,
    // so sharing it across the three sample sizes pins B and Σ_u.
    let instance_seed = mix_seed(seed, 7);
    for n in [50usize, 100, 200] {
        let rep = screening_cell(
            ModelSpec::model2(400, 50, 0.5, n, instance_seed),
            30,
            workers,
        );
        let hits = rep.raw.iter().filter(|r| r.j_size == Some(50)).count();
        probs.push(hits as f64 / 30.0);
    }
    let mut inversions = 0usize;
    let mut worst = 0.0f64;
    for w in probs.windows(2) {
        if w[1] < w[0] {
            inversions += 1;
            worst = worst.max(w[0] - w[1]);
        }
    }
    let passed = inversions == 0 || (inversions == 1 && worst <= 0.05);
    finish(
        out,
        "C3",
        "ridge-ratio consistency trend over n in {50,100,200}",
        t0,
        passed,
        format!(
            "P(s0_hat=s0) = {:.3}/{:.3}/{:.3}, inversions={inversions} (max drop {worst:.3} <= 0.05)",
            probs[0], probs[1], probs[2]
        ),
    );
}

fn lorec_pair(c: f64) -> Vec<Method> {
    vec![
        Method::Lorec(LorecConfig::auto()),
        Method::PvdLorec {
            pvd: PvdConfig::default(),
            lorec: LorecConfig::auto(),
            c,
        },
    ]
}

/// C4: Table-2 orderings at p=100, p1=20, n=150, T=20: RE ordering at
/// r=0.1 and EU ordering at every r ∈ {0.1, 0.5, 1}.
fn c4(out: &mut Vec<CriterionOutcome>, seed: u64, workers: Option<usize>) {
    let t0 = Instant::now();
    let mut details = String::new();
    let mut passed = true;
    for (i, r) in [0.1f64, 0.5, 1.0].into_iter().enumerate() {
        let cell = Cell {
            model: ModelSpec::factor62(100, 20, r, 150, mix_seed(seed, 10 + i as u64)),
            methods: lorec_pair(TABLE2_UNIVERSAL_C),
        };
        let reps = run_experiment(&[cell], 20, workers).expect("table2 cell");
        let re_l = reps[0].re.as_ref().unwrap().mean;
        let eu_l = reps[0].eu.as_ref().unwrap().mean;
        let re_p = reps[1].re.as_ref().unwrap().mean;
        let eu_p = reps[1].eu.as_ref().unwrap().mean;
        let re_ok = re_p < re_l;
        let eu_ok = eu_p < eu_l;
        if r == 0.1 && !re_ok {
            passed = false;
        }
        if !eu_ok {
            passed = false;
        }
        details.push_str(&format!(
            "r={r}: RE {re_p:.3} vs {re_l:.3}, EU {eu_p:.3} vs {eu_l:.3}; "
        ));
    }
    let within_time = t0.elapsed().as_secs_f64() <= 900.0;
    passed = passed && within_time;
    details.push_str(&format!("runtime<=900s={within_time}"));
    finish(
        out,
        "C4",
        "Table-2 orderings PVD-LOREC vs LOREC (p=100, p1=20, n=150, T=20)",
        t0,
        passed,
        details,
    );
}

/// C5: wall-clock ratio TM(PVD-LOREC) ≤ 0.5·TM(LOREC) at p=200, p1=20.
fn c5(out: &mut Vec<CriterionOutcome>, seed: u64, workers: Option<usize>) {
    let t0 = Instant::now();
    let cell = Cell {
        model: ModelSpec::factor62(200, 20, 0.5, 150, mix_seed(seed, 20)),
        methods: lorec_pair(TABLE2_UNIVERSAL_C),
    };
    let reps = run_experiment(&[cell], 3, workers).expect("timing cell");
    let tm_l = reps[0].time_mean_secs;
    let tm_p = reps[1].time_mean_secs;
    let passed = tm_p <= 0.5 * tm_l;
    finish(
        out,
        "C5",
        "Table-2 speed: TM(PVD-LOREC) <= 0.5 TM(LOREC) at p=200, p1=20",
        t0,
        passed,
        format!(
            "TM {tm_p:.3}s vs {tm_l:.3}s (ratio {:.4})",
            tm_p / tm_l.max(1e-12)
        ),
    );
}

/// C6: Figure-1 trends at p1=120, n=150, r=0.5, T=20 over p ∈ {300,600,1000}:
/// RE and EU orderings at p=1000 on matched seeds, and PVD-POET RE
/// stability max/min ≤ 1.5 across p.
fn c6(out: &mut Vec<CriterionOutcome>, seed: u64, workers: Option<usize>) {
    let t0 = Instant::now();
    let mut pvd_re = Vec::new();
    let mut details = String::new();
    let mut orderings_ok = true;
    for (i, p) in [300usize, 600, 1000].into_iter().enumerate() {
        let cell = Cell {
            model: ModelSpec::factor62(p, 120, 0.5, 150, mix_seed(seed, 30 + i as u64)),
            methods: vec![
                Method::Poet {
                    k: KChoice::Auto,
                    c: 0.5,
                },
                Method::PvdPoet {
                    pvd: PvdConfig::default(),
                    k: KChoice::Auto,
                    c: 0.5,
                },
            ],
        };
        let reps = run_experiment(&[cell], 20, workers).expect("figure1 cell");
        let re_poet = reps[0].re.as_ref().unwrap().mean;
        let eu_poet = reps[0].eu.as_ref().unwrap().mean;
        let re_pvd = reps[1].re.as_ref().unwrap().mean;
        let eu_pvd = reps[1].eu.as_ref().unwrap().mean;
        pvd_re.push(re_pvd);
        let re_ok = re_pvd < re_poet;
        let eu_ok = eu_pvd < eu_poet;
        if p == 1000 && !(re_ok && eu_ok) {
            orderings_ok = false;
        }
        details.push_str(&format!(
            "p={p}: RE {re_pvd:.3} vs {re_poet:.3}, EU {eu_pvd:.3} vs {eu_poet:.3}; "
        ));
    }
    let max = pvd_re.iter().cloned().fold(f64::MIN, f64::max);
    let min = pvd_re.iter().cloned().fold(f64::MAX, f64::min);
    let stable = max / min <= 1.5;
    let within_time = t0.elapsed().as_secs_f64() <= 1200.0;
    let passed = orderings_ok && stable && within_time;
    details.push_str(&format!(
        "stability max/min={:.3} (<=1.5), runtime<=1200s={within_time}",
        max / min
    ));
    finish(
        out,
        "C6",
        "Figure-1 trends PVD-POET vs POET (p1=120, n=150, r=0.5, T=20)",
        t0,
        passed,
        details,
    );
}

// ---------------------------------------------------------------------
// C7 oracles: a cyclic Jacobi eigensolver and a joint proximal-gradient
// reference for the LOREC objective, independent of the production code
// paths they check.

struct JacobiEigen {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>, // vectors[k][i] = coordinate i of eigenvector k
}

#[allow(clippy::needless_range_loop)]
fn jacobi_eigen(m: &SymMatrix) -> JacobiEigen {
    let p = m.dim();
    let mut a: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| m.get(i, j)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..p {
            for j in (i + 1)..p {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-26 {
            break;
        }
        for i in 0..p {
            for j in (i + 1)..p {
                if a[i][j].abs() < 1e-19 {
                    continue;
                }
                let theta = 0.5 * (a[j][j] - a[i][i]) / a[i][j];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..p {
                    let (aik, ajk) = (a[i][k], a[j][k]);
                    a[i][k] = c * aik - s * ajk;
                    a[j][k] = s * aik + c * ajk;
                }
                for k in 0..p {
                    let (aki, akj) = (a[k][i], a[k][j]);
                    a[k][i] = c * aki - s * akj;
                    a[k][j] = s * aki + c * akj;
                }
                for k in 0..p {
                    let (vki, vkj) = (v[k][i], v[k][j]);
                    v[k][i] = c * vki - s * vkj;
                    v[k][j] = s * vki + c * vkj;
                }
            }
        }
    }
    let values: Vec<f64> = (0..p).map(|i| a[i][i]).collect();
    // Column k of v is eigenvector k; transpose into row-per-vector form.
    let vectors: Vec<Vec<f64>> = (0..p).map(|k| (0..p).map(|i| v[i][k]).collect()).collect();
    JacobiEigen { values, vectors }
}

/// Spectral soft thresholding via the Jacobi decomposition.
#[allow(clippy::needless_range_loop)]
fn jacobi_svt(m: &SymMatrix, tau: f64) -> SymMatrix {
    let p = m.dim();
    let eig = jacobi_eigen(m);
    let shrunk: Vec<f64> = eig.values.iter().map(|&l| soft(l, tau)).collect();
    SymMatrix::from_fn(p, |i, j| {
        (0..p)
            .map(|k| eig.vectors[k][i] * shrunk[k] * eig.vectors[k][j])
            .sum::<f64>()
    })
}

/// ½‖L+S−Σ̂‖² + λ‖L‖_* + ρ‖S‖₁ with the nuclear norm from the Jacobi oracle.
fn objective_oracle(sigma: &SymMatrix, l: &SymMatrix, s: &SymMatrix, lam: f64, rho: f64) -> f64 {
    let fit = l.add(s).sub(sigma).frobenius_norm();
    let nuclear: f64 = jacobi_eigen(l).values.iter().map(|v| v.abs()).sum();
    let l1: f64 = s.as_matrix().iter().map(|v| v.abs()).sum();
    0.5 * fit * fit + lam * nuclear + rho * l1
}

/// Joint proximal-gradient reference: a gradient step on the fit term in
/// both blocks (step 1/2 for Lipschitz constant 2), then the prox of each
/// penalty, iterated until the objective change falls below 1e-10.
fn reference_objective(sigma: &SymMatrix, lam: f64, rho: f64) -> f64 {
    let p = sigma.dim();
    let mut l = SymMatrix::zeros(p);
    let mut s = SymMatrix::zeros(p);
    let step = 0.5;
    let mut prev = f64::INFINITY;
    for _ in 0..50_000 {
        let resid = l.add(&s).sub(sigma);
        let l_in = l.sub(&resid.scale(step));
        let s_in = s.sub(&resid.scale(step));
        l = jacobi_svt(&l_in, lam * step);
        s = SymMatrix::from_fn(p, |i, j| soft(s_in.get(i, j), rho * step));
        let obj = objective_oracle(sigma, &l, &s, lam, rho);
        if (prev - obj).abs() < 1e-10 {
            return obj;
        }
        prev = obj;
    }
    prev
}

fn approx(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// C7: fast, deterministic formula-level suite against independent oracles.
fn c7(out: &mut Vec<CriterionOutcome>, seed: u64) {
    let t0 = Instant::now();
    let mut failures: Vec<String> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 40));

    // sample_covariance, theta_hat, row_energy vs double loops (<=1e-12).
    let n = 40;
    let p = 6;
    let data = DMatrix::from_fn(n, p, |_, _| rng.random_range(-2.0..2.0));
    let x = DataMatrix::new(data.clone()).unwrap();
    let sig = sample_covariance(&x);
    let th = theta_hat(&x);
    let means: Vec<f64> = (0..p)
        .map(|j| (0..n).map(|k| data[(k, j)]).sum::<f64>() / n as f64)
        .collect();
    for i in 0..p {
        for j in 0..p {
            let mut cov = 0.0;
            for k in 0..n {
                cov += (data[(k, i)] - means[i]) * (data[(k, j)] - means[j]);
            }
            cov /= n as f64;
            if !approx(sig.get(i, j), cov, 1e-12) {
                failures.push(format!("covariance oracle at ({i},{j})"));
            }
            let mut theta = 0.0;
            for k in 0..n {
                let d = data[(k, i)] * data[(k, j)] - means[i] * means[j] - cov;
                theta += d * d;
            }
            theta /= n as f64;
            if !approx(th.get(i, j), theta, 1e-12) {
                failures.push(format!("theta oracle at ({i},{j})"));
            }
        }
    }
    let r = row_energy(&sig);
    for (i, &ri) in r.iter().enumerate() {
        let want = (0..p).map(|j| sig.get(i, j).powi(2)).sum::<f64>() / p as f64;
        if !approx(ri, want, 1e-12) {
            failures.push(format!("row-energy oracle at {i}"));
        }
    }

    // svt vs the Jacobi-based oracle.
    let m = SymMatrix::from_fn(5, |_, _| rng.random_range(-1.0..1.0));
    let got = svt(&m, 0.4).unwrap();
    let want = jacobi_svt(&m, 0.4);
    if got.sub(&want).max_abs() > 1e-8 {
        failures.push("svt vs Jacobi oracle".into());
    }

    // LOREC: objective monotone on a solve; small-instance optimality vs
    // the proximal-gradient reference (<=1e-4 relative).
    let sigma = {
        let b = DMatrix::from_fn(6, 1, |i, _| if i < 3 { 1.0 } else { 0.0 });
        let bb = &b * b.transpose();
        SymMatrix::from_fn(6, |i, j| bb[(i, j)] + if i == j { 0.1 } else { 0.0 })
    };
    let cfg = LorecConfig {
        lambda: 0.3,
        rho: 0.05,
        max_iter: 2000,
        tol: 1e-10,
        auto_tuning: false,
    };
    let split = lorec::solve(&sigma, &cfg).unwrap();
    for w in split.objective_trace.windows(2) {
        if w[1] > w[0] + 1e-10 {
            failures.push(format!("objective increased {} -> {}", w[0], w[1]));
        }
    }
    let ours = objective_oracle(&sigma, &split.low_rank, &split.sparse, 0.3, 0.05);
    let ref_obj = reference_objective(&sigma, 0.3, 0.05);
    if (ours - ref_obj).abs() > 1e-4 * ref_obj.abs().max(1.0) {
        failures.push(format!(
            "small-instance optimality: ours {ours:.8} vs reference {ref_obj:.8}"
        ));
    }

    // poet_estimate with c = 0 returns the sample covariance (<=1e-10).
    let est = poet_estimate(&x, KChoice::Fixed(2), 0.0).unwrap();
    if est.sigma.sub(&sig).max_abs() > 1e-10 {
        failures.push("poet c=0 identity".into());
    }

    // Zero-block invariant is exact for both PVD pipelines, and detection
    // on clean factor data finds the loaded block.
    let factor_x = {
        let mut r2 = ChaCha8Rng::seed_from_u64(mix_seed(seed, 41));
        let b = DMatrix::from_fn(12, 2, |i, _| {
            if i < 4 {
                r2.random_range(0.5..1.5)
            } else {
                0.0
            }
        });
        let f = DMatrix::from_fn(40, 2, |_, _| r2.random_range(-1.0..1.0f64));
        let e = DMatrix::from_fn(40, 12, |_, _| r2.random_range(-0.3..0.3));
        DataMatrix::new(&f * b.transpose() + e).unwrap()
    };
    let det = detect(&factor_x, &PvdConfig::default());
    if det.j_hat.is_empty() || det.s0_hat != det.j_hat.len() {
        failures.push("detect result invariants".into());
    }
    let j: Vec<usize> = (0..4).collect();
    let pl = pvd_lorec_with_index_set(
        &factor_x,
        &j,
        &LorecConfig::auto(),
        &ThresholdSpec::universal(0.5, 0.0),
    )
    .unwrap();
    let pp = pvd_poet_with_index_set(&factor_x, &j, KChoice::Fixed(2), 0.5).unwrap();
    if pl.low_rank_leakage() != 0.0 || pp.low_rank_leakage() != 0.0 {
        failures.push("zero-block invariant".into());
    }
    if pl.additivity_error() > 1e-10 || pp.additivity_error() > 1e-10 {
        failures.push("sigma = low_rank + sparse".into());
    }

    // RE/EU trivial cases.
    let truth = SymMatrix::from_diagonal(&[2.0, 1.0, 0.5]);
    if re_metric(&truth, &truth).unwrap() > 1e-10 {
        failures.push("RE(truth, truth) = 0".into());
    }
    if (re_metric(&truth.scale(2.0), &truth).unwrap() - 1.0).abs() > 1e-10 {
        failures.push("RE(2*truth, truth) = 1".into());
    }
    if eu_metric(&truth, &truth).unwrap() != 0.0 {
        failures.push("EU(truth, truth) = 0".into());
    }

    let passed = failures.is_empty();
    finish(
        out,
        "C7",
        "formula-exact deterministic suite vs independent oracles",
        t0,
        passed,
        if passed {
            "covariance/theta/row-energy <=1e-12; svt; LOREC monotone + optimal <=1e-4; poet c=0; zero-block; RE/EU".into()
        } else {
            failures.join("; ")
        },
    );
}

/// C8: byte-identical reports for repeated runs with the same master seed
/// under different worker counts (timing fields excluded by design).
fn c8(out: &mut Vec<CriterionOutcome>, seed: u64) {
    let t0 = Instant::now();
    let grid = |s: u64| {
        vec![Cell {
            model: ModelSpec::model2(60, 10, 0.9, 50, s),
            methods: vec![
                Method::Pvd(PvdConfig::default()),
                Method::PvdPoet {
                    pvd: PvdConfig::default(),
                    k: KChoice::Fixed(2),
                    c: 0.5,
                },
                Method::PvdLorec {
                    pvd: PvdConfig::default(),
                    lorec: LorecConfig::auto(),
                    c: TABLE2_UNIVERSAL_C,
                },
            ],
        }]
    };
    let render = |reports: &[ExperimentReport]| {
        let stripped: Vec<_> = reports.iter().map(|r| r.strip_timing()).collect();
        (
            reports_to_json(&stripped),
            screening_csv(reports),
            estimation_csv(reports),
        )
    };
    let s = mix_seed(seed, 50);
    let a = render(&run_experiment(&grid(s), 6, Some(1)).unwrap());
    let b = render(&run_experiment(&grid(s), 6, Some(2)).unwrap());
    let c = render(&run_experiment(&grid(s), 6, None).unwrap());
    let passed = a == b && b == c;
    finish(
        out,
        "C8",
        "determinism: identical reports across reruns and worker counts",
        t0,
        passed,
        format!(
            "json {} bytes, screening csv {} bytes, estimation csv {} bytes, all equal={}",
            a.0.len(),
            a.1.len(),
            a.2.len(),
            passed
        ),
    );
}

/// Runs the full acceptance suite, printing one line per criterion.
pub fn run(seed: u64, workers: Option<usize>) -> SelftestReport {
    let mut outcomes = Vec::new();
    c1(&mut outcomes, seed, workers);
    c2(&mut outcomes, seed, workers);
    c3(&mut outcomes, seed, workers);
    c4(&mut outcomes, seed, workers);
    c5(&mut outcomes, seed, workers);
    c6(&mut outcomes, seed, workers);
    c7(&mut outcomes, seed);
    c8(&mut outcomes, seed);
    let all_passed = outcomes.iter().all(|o| o.passed);
    println!(
        "selftest: {}/{} criteria passed",
        outcomes.iter().filter(|o| o.passed).count(),
        outcomes.len()
    );
    SelftestReport {
        seed,
        outcomes,
        all_passed,
    }
}
