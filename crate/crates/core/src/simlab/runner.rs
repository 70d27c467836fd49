//! Seeded Monte-Carlo experiment runner.
//!
//! Within a cell every method sees the same replica data (matched seeds),
//! replicas run in parallel, and aggregation is order-independent, so the
//! report is a pure function of (grid, T, seeds) for any worker count.

use rayon::prelude::*;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::{inv_sqrt, SymMatrix};
use crate::lorec::{lorec_estimate, LorecConfig};
use crate::moments::DataMatrix;
use crate::pipeline::{pvd_lorec, pvd_poet, threshold_estimate, CovEstimate};
use crate::poet::{poet_estimate, KChoice};
use crate::pvd::{detect, PvdConfig};
use crate::simlab::metrics::{eu_metric, mean_sd, re_metric_with, screening_metrics};
use crate::simlab::models::{ModelSpec, Sampler, SigmaTruth};
use crate::simlab::report::{ExperimentReport, ReplicaRaw, SummaryStat};
use crate::thresholding::{ThresholdRule, ThresholdSpec};

/// One estimator (or the bare screening step) to run on each replica.
#[derive(Debug, Clone)]
pub enum Method {
    Pvd(PvdConfig),
    Lorec(LorecConfig),
    PvdLorec {
        pvd: PvdConfig,
        lorec: LorecConfig,
        c: f64,
    },
    Poet {
        k: KChoice,
        c: f64,
    },
    PvdPoet {
        pvd: PvdConfig,
        k: KChoice,
        c: f64,
    },
    Threshold {
        c: f64,
    },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Pvd(_) => "PVD",
            Method::Lorec(_) => "LOREC",
            Method::PvdLorec { .. } => "PVD-LOREC",
            Method::Poet { .. } => "POET",
            Method::PvdPoet { .. } => "PVD-POET",
            Method::Threshold { .. } => "THRESHOLD",
        }
    }
}

/// A model instance plus the methods to evaluate on it.
#[derive(Debug, Clone)]
pub struct Cell {
    pub model: ModelSpec,
    pub methods: Vec<Method>,
}

struct MethodOutcome {
    j_hat: Option<Vec<usize>>,
    re: Option<f64>,
    eu: Option<f64>,
    k_hat: Option<usize>,
    secs: f64,
    error: Option<String>,
}

fn evaluate_estimate(
    est: &CovEstimate,
    inv_root: Option<&SymMatrix>,
    true_u: Option<&SymMatrix>,
) -> Result<(Option<f64>, Option<f64>)> {
    let re = match inv_root {
        Some(w) => Some(re_metric_with(&est.sigma, w)?),
        None => None,
    };
    let eu = match true_u {
        Some(u) => Some(eu_metric(&est.sparse, u)?),
        None => None,
    };
    Ok((re, eu))
}

fn run_method(
    method: &Method,
    x: &DataMatrix,
    inv_root: Option<&SymMatrix>,
    true_u: Option<&SymMatrix>,
) -> MethodOutcome {
    let start = Instant::now();
    let result: Result<MethodOutcome> = (|| match method {
        Method::Pvd(cfg) => {
            let det = detect(x, cfg);
            Ok(MethodOutcome {
                j_hat: Some(det.j_hat),
                re: None,
                eu: None,
                k_hat: None,
                secs: 0.0,
                error: None,
            })
        }
        _ => {
            let est = match method {
                Method::Lorec(cfg) => lorec_estimate(x, cfg)?,
                Method::PvdLorec { pvd, lorec, c } => {
                    pvd_lorec(x, pvd, lorec, &ThresholdSpec::universal(*c, 0.0))?
                }
                Method::Poet { k, c } => poet_estimate(x, *k, *c)?,
                Method::PvdPoet { pvd, k, c } => pvd_poet(x, pvd, *k, *c)?,
                Method::Threshold { c } => threshold_estimate(x, *c, ThresholdRule::Soft)?,
                Method::Pvd(_) => unreachable!(),
            };
            let (re, eu) = evaluate_estimate(&est, inv_root, true_u)?;
            Ok(MethodOutcome {
                j_hat: est.j_hat,
                re,
                eu,
                k_hat: Some(est.k_hat),
                secs: 0.0,
                error: None,
            })
        }
    })();
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok(mut out) => {
            out.secs = secs;
            out
        }
        Err(e) => MethodOutcome {
            j_hat: None,
            re: None,
            eu: None,
            k_hat: None,
            secs,
            error: Some(e.to_string()),
        },
    }
}

fn aggregate(
    cell: &Cell,
    method_idx: usize,
    truth: &SigmaTruth,
    rows: &[Vec<MethodOutcome>],
) -> ExperimentReport {
    let method = &cell.methods[method_idx];
    let spec = &cell.model;
    let t = rows.len();

    let mut in_true = vec![false; spec.p];
    for &i in &truth.true_j {
        in_true[i] = true;
    }

    let mut raw = Vec::with_capacity(t);
    let mut j_sets: Vec<Vec<usize>> = Vec::new();
    let mut res = Vec::new();
    let mut eus = Vec::new();
    let mut times = Vec::new();
    let mut failures = Vec::new();

    for (replica, row) in rows.iter().enumerate() {
        let out = &row[method_idx];
        let (exact, fp_count, fn_count) = match &out.j_hat {
            Some(j) => {
                let fp = j.iter().filter(|&&i| !in_true[i]).count();
                let covered = j.iter().filter(|&&i| in_true[i]).count();
                let fn_c = truth.true_j.len() - covered;
                (Some(fp == 0 && fn_c == 0), Some(fp), Some(fn_c))
            }
            None => (None, None, None),
        };
        raw.push(ReplicaRaw {
            replica,
            j_size: out.j_hat.as_ref().map(|j| j.len()),
            exact,
            fp_count,
            fn_count,
            re: out.re,
            eu: out.eu,
            k_hat: out.k_hat,
            secs: out.secs,
            error: out.error.clone(),
        });
        if let Some(e) = &out.error {
            failures.push(format!("replica {replica}: {e}"));
            continue;
        }
        if let Some(j) = &out.j_hat {
            j_sets.push(j.clone());
        }
        if let Some(v) = out.re {
            res.push(v);
        }
        if let Some(v) = out.eu {
            eus.push(v);
        }
        times.push(out.secs);
    }

    let successes = t - failures.len();
    let screening = if successes > 0 && j_sets.len() == successes {
        Some(screening_metrics(&j_sets, &truth.true_j, spec.p))
    } else {
        None
    };
    let summary = |vals: &[f64]| {
        if vals.is_empty() {
            None
        } else {
            let (mean, sd) = mean_sd(vals);
            Some(SummaryStat { mean, sd })
        }
    };

    ExperimentReport {
        family: spec.family.as_str().to_string(),
        p: spec.p,
        p1: spec.p1,
        signal: spec.signal,
        n: spec.n,
        seed: spec.seed,
        method: method.name().to_string(),
        replicas: t,
        screening,
        re: summary(&res),
        eu: summary(&eus),
        time_mean_secs: if times.is_empty() {
            0.0
        } else {
            times.iter().sum::<f64>() / times.len() as f64
        },
        partial: !failures.is_empty(),
        failures,
        raw,
    }
}

fn run_cell(cell: &Cell, replicas: usize) -> Result<Vec<ExperimentReport>> {
    let sampler = Sampler::new(cell.model)?;
    let truth = sampler.truth();
    let needs_re = cell.methods.iter().any(|m| !matches!(m, Method::Pvd(_)));
    let inv_root = if needs_re {
        Some(inv_sqrt(&truth.sigma, 1e-12)?)
    } else {
        None
    };
    let true_u = truth.sigma_u.as_ref();

    let rows: Vec<Vec<MethodOutcome>> = (0..replicas)
        .into_par_iter()
        .map(|t| {
            let x = sampler.sample(t as u64);
            cell.methods
                .iter()
                .map(|m| run_method(m, &x, inv_root.as_ref(), true_u))
                .collect()
        })
        .collect();

    Ok((0..cell.methods.len())
        .map(|mi| aggregate(cell, mi, truth, &rows))
        .collect())
}

/// Runs every cell × method for `replicas` Monte-Carlo draws. `workers`
/// caps the rayon pool; results are identical for any value.
pub fn run_experiment(
    cells: &[Cell],
    replicas: usize,
    workers: Option<usize>,
) -> Result<Vec<ExperimentReport>> {
    if replicas == 0 {
        return Err(Error::InvalidArgument("replicas must be >= 1".into()));
    }
    let run = || -> Result<Vec<ExperimentReport>> {
        let mut reports = Vec::new();
        for cell in cells {
            reports.extend(run_cell(cell, replicas)?);
        }
        Ok(reports)
    };
    match workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
            pool.install(run)
        }
        None => run(),
    }
}
