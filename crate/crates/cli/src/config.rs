//! Run configuration: a TOML file with one section per command plus
//! `[common]`. Unknown keys are rejected. Every field has a documented
//! default (see `--help` and docs/reproduction.md); command-line flags
//! override file values.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub common: CommonConfig,
    #[serde(default)]
    pub table1: Table1Config,
    #[serde(default)]
    pub table2: Table2Config,
    #[serde(default)]
    pub figure1: Figure1Config,
    #[serde(default)]
    pub estimate: EstimateConfig,
    #[serde(default)]
    pub stability: StabilityConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommonConfig {
    /// Master seed; every cell derives its own stream from it.
    #[serde(default = "d_seed")]
    pub seed: u64,
    /// Worker threads; 0 uses the process-wide default pool.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "d_out_dir")]
    pub out_dir: String,
}

impl Default for CommonConfig {
    fn default() -> Self {
        Self {
            seed: d_seed(),
            workers: 0,
            out_dir: d_out_dir(),
        }
    }
}

fn d_seed() -> u64 {
    pvdcov::selftest::DEFAULT_SEED
}
fn d_out_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Config {
    #[serde(default = "d_t1_p")]
    pub p: usize,
    #[serde(default = "d_t1_p1_list")]
    pub p1_list: Vec<usize>,
    #[serde(default = "d_rho_list")]
    pub rho_list: Vec<f64>,
    #[serde(default = "d_t1_n")]
    pub n: usize,
    #[serde(default = "d_t1_t")]
    pub t: usize,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            p: d_t1_p(),
            p1_list: d_t1_p1_list(),
            rho_list: d_rho_list(),
            n: d_t1_n(),
            t: d_t1_t(),
        }
    }
}

fn d_t1_p() -> usize {
    400
}
fn d_t1_p1_list() -> Vec<usize> {
    vec![50, 100, 200]
}
fn d_rho_list() -> Vec<f64> {
    vec![0.1, 0.3, 0.5, 0.7, 0.9]
}
fn d_t1_n() -> usize {
    100
}
fn d_t1_t() -> usize {
    30
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table2Config {
    /// (p, p1) accuracy cells.
    #[serde(default = "d_t2_cells")]
    pub cells: Vec<(usize, usize)>,
    #[serde(default = "d_r_list")]
    pub r_list: Vec<f64>,
    #[serde(default = "d_t2_n")]
    pub n: usize,
    #[serde(default = "d_t2_t")]
    pub t: usize,
    /// Extra wall-clock cell (p, p1) run at `timing_t` replicas, r = 0.5.
    #[serde(default = "d_t2_timing_cell")]
    pub timing_cell: Option<(usize, usize)>,
    #[serde(default = "d_t2_timing_t")]
    pub timing_t: usize,
    /// Step-3 universal soft-threshold constant for PVD-LOREC off-blocks.
    #[serde(default = "d_t2_universal_c")]
    pub universal_c: f64,
}

impl Default for Table2Config {
    fn default() -> Self {
        Self {
            cells: d_t2_cells(),
            r_list: d_r_list(),
            n: d_t2_n(),
            t: d_t2_t(),
            timing_cell: d_t2_timing_cell(),
            timing_t: d_t2_timing_t(),
            universal_c: d_t2_universal_c(),
        }
    }
}

fn d_t2_cells() -> Vec<(usize, usize)> {
    vec![(100, 20)]
}
fn d_r_list() -> Vec<f64> {
    vec![0.1, 0.5, 1.0]
}
fn d_t2_n() -> usize {
    150
}
fn d_t2_t() -> usize {
    20
}
fn d_t2_timing_cell() -> Option<(usize, usize)> {
    Some((200, 20))
}
fn d_t2_timing_t() -> usize {
    3
}
fn d_t2_universal_c() -> f64 {
    pvdcov::selftest::TABLE2_UNIVERSAL_C
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure1Config {
    #[serde(default = "d_f1_p_list")]
    pub p_list: Vec<usize>,
    #[serde(default = "d_f1_p1")]
    pub p1: usize,
    #[serde(default = "d_t2_n")]
    pub n: usize,
    #[serde(default = "d_t2_t")]
    pub t: usize,
    #[serde(default = "d_f1_r_list")]
    pub r_list: Vec<f64>,
    /// Adaptive-threshold constant.
    #[serde(default = "d_c_half")]
    pub c: f64,
    /// Number of factors; 0 selects by the eigenvalue-ratio criterion.
    #[serde(default)]
    pub k: usize,
}

impl Default for Figure1Config {
    fn default() -> Self {
        Self {
            p_list: d_f1_p_list(),
            p1: d_f1_p1(),
            n: d_t2_n(),
            t: d_t2_t(),
            r_list: d_f1_r_list(),
            c: d_c_half(),
            k: 0,
        }
    }
}

fn d_f1_p_list() -> Vec<usize> {
    vec![300, 600, 1000]
}
fn d_f1_p1() -> usize {
    120
}
fn d_f1_r_list() -> Vec<f64> {
    vec![0.5]
}
fn d_c_half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    #[serde(default = "d_method")]
    pub method: String,
    /// Adaptive-threshold constant (poet paths) and block constant.
    #[serde(default = "d_c_half")]
    pub c: f64,
    /// Universal constant for PVD-LOREC off-blocks.
    #[serde(default = "d_c_half")]
    pub universal_c: f64,
    /// Number of factors; 0 = eigenvalue-ratio choice.
    #[serde(default)]
    pub k: usize,
    /// LOREC tuning; 0 = automatic (λ=√(dim/n), ρ=0.5√(log dim/n)).
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub rho: f64,
    /// Screening ridge; 0 = automatic [(log p)⁵/n]^{3/8}.
    #[serde(default)]
    pub ridge: f64,
    #[serde(default)]
    pub has_header: bool,
    /// Floor the eigenvalues of thresholded estimates at 1e-8 (off by
    /// default; raw estimates may be indefinite).
    #[serde(default)]
    pub pd_repair: bool,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            method: d_method(),
            c: d_c_half(),
            universal_c: d_c_half(),
            k: 0,
            lambda: 0.0,
            rho: 0.0,
            ridge: 0.0,
            has_header: false,
            pd_repair: false,
        }
    }
}

fn d_method() -> String {
    "pvd-poet".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    #[serde(default = "d_sub_n")]
    pub subsample_n: usize,
    #[serde(default = "d_sub_t")]
    pub t: usize,
    /// Keep variables whose sample SD (divisor n) lies in [sd_min, sd_max].
    #[serde(default = "d_sd_min")]
    pub sd_min: f64,
    #[serde(default = "d_sd_max")]
    pub sd_max: f64,
    /// After the interval filter, keep the top_m variables by SD (0 = all).
    #[serde(default)]
    pub top_m: usize,
    #[serde(default)]
    pub has_header: bool,
    #[serde(default)]
    pub ridge: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            subsample_n: d_sub_n(),
            t: d_sub_t(),
            sd_min: d_sd_min(),
            sd_max: d_sd_max(),
            top_m: 0,
            has_header: false,
            ridge: 0.0,
        }
    }
}

fn d_sub_n() -> usize {
    250
}
fn d_sub_t() -> usize {
    50
}
fn d_sd_min() -> f64 {
    1.0
}
fn d_sd_max() -> f64 {
    1.5
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text)
            .with_context(|| format!("invalid config file {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.table1.p < 2 || self.table1.n < 2 || self.table1.t == 0 {
            bail!("table1: need p >= 2, n >= 2, t >= 1");
        }
        for &p1 in &self.table1.p1_list {
            if p1 == 0 || p1 >= self.table1.p {
                bail!("table1: p1 values must lie in 1..p");
            }
        }
        for &rho in &self.table1.rho_list {
            if !rho.is_finite() || rho <= 0.0 || rho > 1.0 {
                bail!("table1: rho values must lie in (0, 1]");
            }
        }
        for &(p, p1) in &self.table2.cells {
            if p1 == 0 || p1 >= p {
                bail!("table2: cells need 1 <= p1 < p");
            }
        }
        if self.table2.t == 0 || self.table2.n < 2 {
            bail!("table2: need n >= 2, t >= 1");
        }
        for &r in &self.table2.r_list {
            if !r.is_finite() || r <= 0.0 {
                bail!("table2: r values must be positive");
            }
        }
        if self.figure1.p1 == 0 || self.figure1.p_list.iter().any(|&p| p <= self.figure1.p1) {
            bail!("figure1: need p1 >= 1 and every p > p1");
        }
        if !self.estimate.c.is_finite()
            || self.estimate.c < 0.0
            || !self.estimate.universal_c.is_finite()
            || self.estimate.universal_c < 0.0
        {
            bail!("estimate: threshold constants must be nonnegative");
        }
        if self.stability.subsample_n < 2 || self.stability.t == 0 {
            bail!("stability: need subsample_n >= 2, t >= 1");
        }
        if !self.stability.sd_min.is_finite()
            || self.stability.sd_min < 0.0
            || self.stability.sd_max < self.stability.sd_min
        {
            bail!("stability: need 0 <= sd_min <= sd_max");
        }
        Ok(())
    }

    /// Paper-scale grids behind the --full flag.
    pub fn apply_full_scale(&mut self) {
        self.table1.p = 1000;
        self.table1.t = 100;
        self.table2.cells = vec![
            (100, 20),
            (100, 90),
            (200, 20),
            (200, 120),
            (300, 20),
            (300, 120),
        ];
        self.table2.t = 100;
        self.figure1.p_list = (0..8).map(|i| 300 + 100 * i).collect();
        self.figure1.r_list = vec![0.1, 0.5, 1.0];
        self.figure1.t = 100;
    }
}
