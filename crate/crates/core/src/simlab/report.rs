//! Report containers and their CSV/JSON serializations.
//!
//! CSV output uses fixed six-decimal formatting so identical runs produce
//! byte-identical files; wall-clock columns (TM) live in a separate timing
//! CSV because they are inherently non-reproducible.

use serde::Serialize;

use crate::simlab::metrics::ScreeningMetrics;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStat {
    pub mean: f64,
    pub sd: f64,
}

/// One replica's raw values; fields are absent when the method does not
/// produce them.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicaRaw {
    pub replica: usize,
    pub j_size: Option<usize>,
    pub exact: Option<bool>,
    pub fp_count: Option<usize>,
    pub fn_count: Option<usize>,
    pub re: Option<f64>,
    pub eu: Option<f64>,
    pub k_hat: Option<usize>,
    pub secs: f64,
    pub error: Option<String>,
}

/// Per-(cell, method) Monte-Carlo summary plus raw per-replica values.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub family: String,
    pub p: usize,
    pub p1: usize,
    pub signal: f64,
    pub n: usize,
    pub seed: u64,
    pub method: String,
    pub replicas: usize,
    pub screening: Option<ScreeningMetrics>,
    pub re: Option<SummaryStat>,
    pub eu: Option<SummaryStat>,
    pub time_mean_secs: f64,
    pub partial: bool,
    pub failures: Vec<String>,
    pub raw: Vec<ReplicaRaw>,
}

impl ExperimentReport {
    /// Copy with all wall-clock fields zeroed, for byte-level determinism
    /// comparisons.
    pub fn strip_timing(&self) -> Self {
        let mut out = self.clone();
        out.time_mean_secs = 0.0;
        for r in &mut out.raw {
            r.secs = 0.0;
        }
        out
    }
}

/// Pretty JSON for a report list (stable field order, stable float text).
pub fn reports_to_json(reports: &[ExperimentReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

fn f6(v: f64) -> String {
    format!("{v:.6}")
}

fn opt_stat(stat: &Option<SummaryStat>) -> (String, String) {
    match stat {
        Some(s) => (f6(s.mean), f6(s.sd)),
        None => ("NA".into(), "NA".into()),
    }
}

/// Screening-accuracy table, one row per cell (PVD rows only):
/// `model,p,p1,rho,n,T,Mean,SD,FP,FN,EQ`.
pub fn screening_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("model,p,p1,rho,n,T,Mean,SD,FP,FN,EQ\n");
    for r in reports {
        let Some(s) = &r.screening else { continue };
        if r.method != "PVD" {
            continue;
        }
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.family,
            r.p,
            r.p1,
            r.signal,
            r.n,
            r.replicas,
            f6(s.mean),
            f6(s.sd),
            f6(s.fp),
            f6(s.fnr),
            f6(s.eq),
        ));
    }
    out
}

/// Estimation-accuracy table: `p,p1,r,n,T,method,EU,EU_sd,RE,RE_sd`.
pub fn estimation_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("p,p1,r,n,T,method,EU,EU_sd,RE,RE_sd\n");
    for r in reports {
        if r.re.is_none() && r.eu.is_none() {
            continue;
        }
        let (eu, eu_sd) = opt_stat(&r.eu);
        let (re, re_sd) = opt_stat(&r.re);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.p, r.p1, r.signal, r.n, r.replicas, r.method, eu, eu_sd, re, re_sd,
        ));
    }
    out
}

/// Wall-clock table (not byte-reproducible): `p,p1,r,n,T,method,TM`.
pub fn timing_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("p,p1,r,n,T,method,TM\n");
    for r in reports {
        if r.re.is_none() && r.eu.is_none() {
            continue;
        }
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.p,
            r.p1,
            r.signal,
            r.n,
            r.replicas,
            r.method,
            format_args!("{:.3}", r.time_mean_secs),
        ));
    }
    out
}

/// Plot-ready sweep table: `p,method,r,RE_mean,RE_sd,EU_mean,EU_sd`.
pub fn figure_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("p,method,r,RE_mean,RE_sd,EU_mean,EU_sd\n");
    for r in reports {
        if r.re.is_none() && r.eu.is_none() {
            continue;
        }
        let (re, re_sd) = opt_stat(&r.re);
        let (eu, eu_sd) = opt_stat(&r.eu);
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.p, r.method, r.signal, re, re_sd, eu, eu_sd,
        ));
    }
    out
}
