//! Command implementations. Every command is reproducible from
//! (config file, master seed): statistical CSV outputs are byte-identical
//! across reruns and worker counts; wall-clock columns live in separate
//! `*_timing.csv` files.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use pvdcov::lorec::LorecConfig;
use pvdcov::moments::{sample_covariance, DataMatrix};
use pvdcov::pipeline::{pvd_lorec, pvd_poet, threshold_estimate, CovEstimate};
use pvdcov::poet::{poet_estimate, KChoice};
use pvdcov::pvd::{detect, PvdConfig, Ridge};
use pvdcov::selftest;
use pvdcov::simlab::{
    estimation_csv, figure_csv, mix_seed, reports_to_json, run_experiment, screening_csv,
    timing_csv, Cell, Method, ModelFamily, ModelSpec,
};
use pvdcov::thresholding::ThresholdRule;
use rand::SeedableRng;
use serde::Serialize;

use crate::config::{EstimateConfig, RunConfig, StabilityConfig};
use crate::io::{read_data_csv, write_index_csv, write_matrix_csv, write_text, CsvData};

/// Failure class, mapped to the documented exit codes.
#[derive(Debug)]
pub enum CmdError {
    /// Invalid configuration or arguments (exit 2).
    Config(anyhow::Error),
    /// Malformed input data (exit 3).
    Input(anyhow::Error),
    /// Computation or output failure (exit 4).
    Compute(anyhow::Error),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Input(_) => 3,
            CmdError::Compute(_) => 4,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Config(e) => write!(f, "configuration error: {e:#}"),
            CmdError::Input(e) => write!(f, "input error: {e:#}"),
            CmdError::Compute(e) => write!(f, "computation error: {e:#}"),
        }
    }
}

pub type CmdResult = std::result::Result<i32, CmdError>;

/// Per-cell seed: FNV-1a over a stable tag, mixed with the master seed, so
/// adding grid cells never perturbs existing ones.
fn cell_seed(master: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix_seed(master, h)
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn workers_opt(workers: usize) -> Option<usize> {
    if workers == 0 {
        None
    } else {
        Some(workers)
    }
}

pub fn cmd_table1(cfg: &RunConfig, out_dir: &Path) -> CmdResult {
    let t1 = &cfg.table1;
    let seed = cfg.common.seed;
    let mut cells = Vec::new();
    for family in [ModelFamily::Model1, ModelFamily::Model2] {
        for &p1 in &t1.p1_list {
            for &rho in &t1.rho_list {
                let tag = format!(
                    "table1/{}/p{}/p1_{}/rho{}/n{}",
                    family.as_str(),
                    t1.p,
                    p1,
                    rho,
                    t1.n
                );
                let spec = match family {
                    ModelFamily::Model1 => {
                        ModelSpec::model1(t1.p, p1, rho, t1.n, cell_seed(seed, &tag))
                    }
                    _ => ModelSpec::model2(t1.p, p1, rho, t1.n, cell_seed(seed, &tag)),
                };
                cells.push(Cell {
                    model: spec,
                    methods: vec![Method::Pvd(PvdConfig::default())],
                });
            }
        }
    }
    let reports = run_experiment(&cells, t1.t, workers_opt(cfg.common.workers))
        .map_err(|e| CmdError::Compute(anyhow!(e)))?;
    ensure_out_dir(out_dir).map_err(CmdError::Compute)?;
    write_text(&out_dir.join("table1.csv"), &screening_csv(&reports)).map_err(CmdError::Compute)?;
    write_text(&out_dir.join("table1.json"), &reports_to_json(&reports))
        .map_err(CmdError::Compute)?;
    println!(
        "table1: {} cells x T={} -> {}",
        cells.len(),
        t1.t,
        out_dir.join("table1.csv").display()
    );
    Ok(0)
}

pub fn cmd_table2(cfg: &RunConfig, out_dir: &Path) -> CmdResult {
    let t2 = &cfg.table2;
    let seed = cfg.common.seed;
    let workers = workers_opt(cfg.common.workers);
    let methods = |c: f64| {
        vec![
            Method::Lorec(LorecConfig::auto()),
            Method::PvdLorec {
                pvd: PvdConfig::default(),
                lorec: LorecConfig::auto(),
                c,
            },
        ]
    };

    let mut reports = Vec::new();
    for &(p, p1) in &t2.cells {
        for &r in &t2.r_list {
            let tag = format!("table2/p{p}/p1_{p1}/r{r}/n{}", t2.n);
            let cell = Cell {
                model: ModelSpec::factor62(p, p1, r, t2.n, cell_seed(seed, &tag)),
                methods: methods(t2.universal_c),
            };
            reports.extend(
                run_experiment(&[cell], t2.t, workers)
                    .map_err(|e| CmdError::Compute(anyhow!(e)))?,
            );
        }
    }
    if let Some((p, p1)) = t2.timing_cell {
        let tag = format!("table2/timing/p{p}/p1_{p1}/n{}", t2.n);
        let cell = Cell {
            model: ModelSpec::factor62(p, p1, 0.5, t2.n, cell_seed(seed, &tag)),
            methods: methods(t2.universal_c),
        };
        reports.extend(
            run_experiment(&[cell], t2.timing_t, workers)
                .map_err(|e| CmdError::Compute(anyhow!(e)))?,
        );
    }

    ensure_out_dir(out_dir).map_err(CmdError::Compute)?;
    write_text(&out_dir.join("table2.csv"), &estimation_csv(&reports))
        .map_err(CmdError::Compute)?;
    write_text(&out_dir.join("table2_timing.csv"), &timing_csv(&reports))
        .map_err(CmdError::Compute)?;
    write_text(&out_dir.join("table2.json"), &reports_to_json(&reports))
        .map_err(CmdError::Compute)?;
    println!(
        "table2: {} report rows -> {}",
        reports.len(),
        out_dir.join("table2.csv").display()
    );
    Ok(0)
}

pub fn cmd_figure1(cfg: &RunConfig, out_dir: &Path) -> CmdResult {
    let f1 = &cfg.figure1;
    let seed = cfg.common.seed;
    let workers = workers_opt(cfg.common.workers);
    let k = if f1.k == 0 {
        KChoice::Auto
    } else {
        KChoice::Fixed(f1.k)
    };

    let mut reports = Vec::new();
    for &p in &f1.p_list {
        for &r in &f1.r_list {
            let tag = format!("figure1/p{p}/p1_{}/r{r}/n{}", f1.p1, f1.n);
            let cell = Cell {
                model: ModelSpec::factor62(p, f1.p1, r, f1.n, cell_seed(seed, &tag)),
                methods: vec![
                    Method::Poet { k, c: f1.c },
                    Method::PvdPoet {
                        pvd: PvdConfig::default(),
                        k,
                        c: f1.c,
                    },
                ],
            };
            reports.extend(
                run_experiment(&[cell], f1.t, workers)
                    .map_err(|e| CmdError::Compute(anyhow!(e)))?,
            );
        }
    }

    ensure_out_dir(out_dir).map_err(CmdError::Compute)?;
    write_text(&out_dir.join("figure1.csv"), &figure_csv(&reports)).map_err(CmdError::Compute)?;
    write_text(&out_dir.join("figure1_timing.csv"), &timing_csv(&reports))
        .map_err(CmdError::Compute)?;
    write_text(&out_dir.join("figure1.json"), &reports_to_json(&reports))
        .map_err(CmdError::Compute)?;
    println!(
        "figure1: {} report rows -> {}",
        reports.len(),
        out_dir.join("figure1.csv").display()
    );
    Ok(0)
}

#[derive(Serialize)]
struct EstimateSummary {
    method: String,
    n: usize,
    p: usize,
    k_hat: usize,
    j_size: Option<usize>,
    /// 1-based indices of the detected pivotal variables.
    j_hat: Option<Vec<usize>>,
    iterations: usize,
    converged: bool,
    elapsed_secs: f64,
}

fn lorec_config(ecfg: &EstimateConfig) -> std::result::Result<LorecConfig, CmdError> {
    if ecfg.lambda > 0.0 && ecfg.rho > 0.0 {
        LorecConfig::fixed(ecfg.lambda, ecfg.rho).map_err(|e| CmdError::Config(anyhow!(e)))
    } else if ecfg.lambda == 0.0 && ecfg.rho == 0.0 {
        Ok(LorecConfig::auto())
    } else {
        Err(CmdError::Config(anyhow!(
            "lambda and rho must both be set (fixed tuning) or both be 0 (automatic)"
        )))
    }
}

fn pvd_config(ridge: f64) -> std::result::Result<PvdConfig, CmdError> {
    if ridge < 0.0 || !ridge.is_finite() {
        return Err(CmdError::Config(anyhow!("ridge must be >= 0")));
    }
    Ok(PvdConfig {
        ridge: if ridge == 0.0 {
            Ridge::Auto
        } else {
            Ridge::Fixed(ridge)
        },
        ..Default::default()
    })
}

/// Runs one estimator on a user data matrix; shared by the estimate
/// command and the in-process round-trip test.
pub fn estimate_on_data(
    data: &DataMatrix,
    ecfg: &EstimateConfig,
) -> std::result::Result<Option<CovEstimate>, CmdError> {
    let k = if ecfg.k == 0 {
        KChoice::Auto
    } else {
        KChoice::Fixed(ecfg.k)
    };
    let pvd = pvd_config(ecfg.ridge)?;
    let compute = |r: pvdcov::Result<CovEstimate>| r.map_err(|e| CmdError::Compute(anyhow!(e)));
    match ecfg.method.as_str() {
        "pvd" => Ok(None),
        "lorec" => {
            let cfg = lorec_config(ecfg)?;
            compute(pvdcov::lorec::lorec_estimate(data, &cfg)).map(Some)
        }
        "pvd-lorec" => {
            let cfg = lorec_config(ecfg)?;
            let thr = pvdcov::thresholding::ThresholdSpec::universal(ecfg.universal_c, 0.0);
            compute(pvd_lorec(data, &pvd, &cfg, &thr)).map(Some)
        }
        "poet" => compute(poet_estimate(data, k, ecfg.c)).map(Some),
        "pvd-poet" => compute(pvd_poet(data, &pvd, k, ecfg.c)).map(Some),
        "threshold" => compute(threshold_estimate(
            data,
            ecfg.universal_c,
            ThresholdRule::Soft,
        ))
        .map(Some),
        other => Err(CmdError::Config(anyhow!(
            "unknown method {other:?}; expected pvd, lorec, pvd-lorec, poet, pvd-poet or threshold"
        ))),
    }
}

pub fn cmd_estimate(cfg: &RunConfig, out_dir: &Path, data_path: &Path) -> CmdResult {
    let ecfg = &cfg.estimate;
    let CsvData { data, names } =
        read_data_csv(data_path, ecfg.has_header).map_err(CmdError::Input)?;
    ensure_out_dir(out_dir).map_err(CmdError::Compute)?;

    let start = Instant::now();
    match estimate_on_data(&data, ecfg)? {
        None => {
            // Screening only.
            let pvd = pvd_config(ecfg.ridge)?;
            let res = detect(&data, &pvd);
            write_index_csv(
                &out_dir.join("estimate_j_hat.csv"),
                &res.j_hat,
                names.as_deref(),
            )
            .map_err(CmdError::Compute)?;
            let summary = EstimateSummary {
                method: "pvd".into(),
                n: data.n(),
                p: data.p(),
                k_hat: 0,
                j_size: Some(res.j_hat.len()),
                j_hat: Some(res.j_hat.iter().map(|i| i + 1).collect()),
                iterations: 1,
                converged: true,
                elapsed_secs: start.elapsed().as_secs_f64(),
            };
            write_text(
                &out_dir.join("estimate_summary.json"),
                &serde_json::to_string_pretty(&summary).expect("serialize"),
            )
            .map_err(CmdError::Compute)?;
            println!(
                "pvd: detected {} pivotal variables -> {}",
                res.j_hat.len(),
                out_dir.join("estimate_j_hat.csv").display()
            );
        }
        Some(mut est) => {
            if ecfg.pd_repair {
                est.sigma = pvdcov::thresholding::pd_repair(&est.sigma, 1e-8)
                    .map_err(|e| CmdError::Compute(anyhow!(e)))?;
                est.sparse = pvdcov::thresholding::pd_repair(&est.sparse, 1e-8)
                    .map_err(|e| CmdError::Compute(anyhow!(e)))?;
            }
            write_matrix_csv(&out_dir.join("estimate_sigma.csv"), &est.sigma)
                .map_err(CmdError::Compute)?;
            write_matrix_csv(&out_dir.join("estimate_sigma_u.csv"), &est.sparse)
                .map_err(CmdError::Compute)?;
            if let Some(j) = &est.j_hat {
                write_index_csv(&out_dir.join("estimate_j_hat.csv"), j, names.as_deref())
                    .map_err(CmdError::Compute)?;
            }
            let summary = EstimateSummary {
                method: ecfg.method.clone(),
                n: data.n(),
                p: data.p(),
                k_hat: est.k_hat,
                j_size: est.j_hat.as_ref().map(|j| j.len()),
                j_hat: est
                    .j_hat
                    .as_ref()
                    .map(|j| j.iter().map(|i| i + 1).collect()),
                iterations: est.diagnostics.iterations,
                converged: est.diagnostics.converged,
                elapsed_secs: start.elapsed().as_secs_f64(),
            };
            write_text(
                &out_dir.join("estimate_summary.json"),
                &serde_json::to_string_pretty(&summary).expect("serialize"),
            )
            .map_err(CmdError::Compute)?;
            println!(
                "{}: K_hat={}, |J_hat|={:?} -> {}",
                ecfg.method,
                est.k_hat,
                est.j_hat.as_ref().map(|j| j.len()),
                out_dir.join("estimate_sigma.csv").display()
            );
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct StabilitySummary {
    n: usize,
    p: usize,
    kept_variables: usize,
    subsample_n: usize,
    replicas: usize,
    size_mean: f64,
    size_sd: f64,
    sd_min: f64,
    sd_max: f64,
    top_m: usize,
    seed: u64,
}

/// Sample SD (divisor n, matching the covariance convention) per column.
fn column_sds(data: &DataMatrix) -> Vec<f64> {
    let sigma = sample_covariance(data);
    (0..data.p()).map(|i| sigma.get(i, i).sqrt()).collect()
}

/// Applies the SD interval filter then the optional top-m cut; returns
/// kept original indices, SD-descending for the top-m step but reported
/// ascending.
fn sd_filter(sds: &[f64], scfg: &StabilityConfig) -> Vec<usize> {
    let mut kept: Vec<usize> = (0..sds.len())
        .filter(|&i| sds[i] >= scfg.sd_min && sds[i] <= scfg.sd_max)
        .collect();
    if scfg.top_m > 0 && kept.len() > scfg.top_m {
        kept.sort_by(|&a, &b| sds[b].partial_cmp(&sds[a]).unwrap().then(a.cmp(&b)));
        kept.truncate(scfg.top_m);
    }
    kept.sort_unstable();
    kept
}

pub fn cmd_stability(cfg: &RunConfig, out_dir: &Path, data_path: &Path) -> CmdResult {
    let scfg = &cfg.stability;
    let seed = cfg.common.seed;
    let CsvData { data, names } =
        read_data_csv(data_path, scfg.has_header).map_err(CmdError::Input)?;
    if scfg.subsample_n > data.n() {
        return Err(CmdError::Config(anyhow!(
            "subsample_n = {} exceeds the number of observations n = {}",
            scfg.subsample_n,
            data.n()
        )));
    }

    let sds = column_sds(&data);
    let kept = sd_filter(&sds, scfg);
    if kept.len() < 2 {
        return Err(CmdError::Input(anyhow!(
            "SD filter kept {} variables; need at least 2",
            kept.len()
        )));
    }
    let filtered = data
        .select_columns(&kept)
        .map_err(|e| CmdError::Compute(anyhow!(e)))?;

    let pvd = pvd_config(scfg.ridge)?;
    let mut sizes = Vec::with_capacity(scfg.t);
    let mut counts = vec![0usize; kept.len()];
    for t in 0..scfg.t {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(mix_seed(seed, t as u64));
        let rows: Vec<usize> = if scfg.subsample_n == data.n() {
            (0..data.n()).collect()
        } else {
            rand::seq::index::sample(&mut rng, data.n(), scfg.subsample_n).into_vec()
        };
        let sub = filtered
            .select_rows(&rows)
            .map_err(|e| CmdError::Compute(anyhow!(e)))?;
        let res = detect(&sub, &pvd);
        sizes.push(res.j_hat.len());
        for &i in &res.j_hat {
            counts[i] += 1;
        }
    }

    let mean = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
    let sd = if sizes.len() > 1 {
        (sizes
            .iter()
            .map(|&s| (s as f64 - mean).powi(2))
            .sum::<f64>()
            / (sizes.len() - 1) as f64)
            .sqrt()
    } else {
        0.0
    };

    ensure_out_dir(out_dir).map_err(CmdError::Compute)?;
    let mut sizes_csv = String::from("replica,j_size\n");
    for (t, s) in sizes.iter().enumerate() {
        sizes_csv.push_str(&format!("{t},{s}\n"));
    }
    write_text(&out_dir.join("stability_sizes.csv"), &sizes_csv).map_err(CmdError::Compute)?;

    let mut freq_csv = String::from("index,name,count,frequency\n");
    for (local, &orig) in kept.iter().enumerate() {
        let name = names.as_ref().map(|n| n[orig].as_str()).unwrap_or("");
        freq_csv.push_str(&format!(
            "{},{},{},{:.6}\n",
            orig + 1,
            name,
            counts[local],
            counts[local] as f64 / scfg.t as f64
        ));
    }
    write_text(&out_dir.join("stability_frequency.csv"), &freq_csv).map_err(CmdError::Compute)?;

    let summary = StabilitySummary {
        n: data.n(),
        p: data.p(),
        kept_variables: kept.len(),
        subsample_n: scfg.subsample_n,
        replicas: scfg.t,
        size_mean: mean,
        size_sd: sd,
        sd_min: scfg.sd_min,
        sd_max: scfg.sd_max,
        top_m: scfg.top_m,
        seed,
    };
    write_text(
        &out_dir.join("stability_summary.json"),
        &serde_json::to_string_pretty(&summary).expect("serialize"),
    )
    .map_err(CmdError::Compute)?;
    println!(
        "stability: kept {} variables, |J_hat| mean {:.2} sd {:.2} over T={} -> {}",
        kept.len(),
        mean,
        sd,
        scfg.t,
        out_dir.join("stability_summary.json").display()
    );
    Ok(0)
}

pub fn cmd_selftest(cfg: &RunConfig, out_dir: &Path) -> CmdResult {
    let report = selftest::run(cfg.common.seed, workers_opt(cfg.common.workers));
    ensure_out_dir(out_dir).map_err(CmdError::Compute)?;
    write_text(
        &out_dir.join("selftest.json"),
        &serde_json::to_string_pretty(&report).expect("serialize"),
    )
    .map_err(CmdError::Compute)?;
    Ok(if report.all_passed { 0 } else { 5 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_seed_is_stable_and_tag_sensitive() {
        let a = cell_seed(17, "table1/2/p400");
        assert_eq!(a, cell_seed(17, "table1/2/p400"));
        assert_ne!(a, cell_seed(17, "table1/2/p401"));
        assert_ne!(a, cell_seed(18, "table1/2/p400"));
    }

    #[test]
    fn sd_filter_interval_and_top_m() {
        let sds = [0.5, 1.2, 1.4, 1.1, 2.0];
        let base = StabilityConfig {
            sd_min: 1.0,
            sd_max: 1.5,
            top_m: 0,
            ..Default::default()
        };
        assert_eq!(sd_filter(&sds, &base), vec![1, 2, 3]);
        let top = StabilityConfig { top_m: 2, ..base };
        assert_eq!(sd_filter(&sds, &top), vec![1, 2]);
    }
}
