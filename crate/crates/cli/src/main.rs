//! pvdcov: pivotal-variable detection and two-stage covariance estimation.

mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{
    cmd_estimate, cmd_figure1, cmd_selftest, cmd_stability, cmd_table1, cmd_table2, CmdError,
    CmdResult,
};
use config::RunConfig;

const AFTER_HELP: &str = "\
CONFIG FILE (TOML, flat key-value sections; unknown keys rejected):
  [common]    seed=17  workers=0 (0=all cores)  out_dir=\"out\"
  [table1]    p=400  p1_list=[50,100,200]  rho_list=[0.1,0.3,0.5,0.7,0.9]  n=100  t=30
  [table2]    cells=[[100,20]]  r_list=[0.1,0.5,1.0]  n=150  t=20
              timing_cell=[200,20]  timing_t=3  universal_c=1.0
  [figure1]   p_list=[300,600,1000]  p1=120  n=150  t=20  r_list=[0.5]  c=0.5  k=0 (0=auto)
  [estimate]  method=\"pvd-poet\"  c=0.5  universal_c=0.5  k=0  lambda=0  rho=0
              ridge=0 (0=auto [(log p)^5/n]^(3/8))  has_header=false
              pd_repair=false (floor eigenvalues of the outputs at 1e-8)
  [stability] subsample_n=250  t=50  sd_min=1.0  sd_max=1.5  top_m=0  has_header=false

  lambda=rho=0 selects automatic LOREC tuning: lambda=sqrt(dim/n),
  rho=0.5*sqrt(log(dim)/n) with dim the working dimension.

DETERMINISM: statistical CSV outputs are byte-identical for a fixed
  (config, seed), independent of worker count; wall-clock columns (TM)
  are written to separate *_timing.csv files.

EXIT CODES: 0 success; 2 invalid configuration/arguments; 3 malformed
  input data; 4 computation failure; 5 selftest criteria failed.

ENVIRONMENT: PVDCOV_WORKERS sets the default worker count (flag overrides).
";

#[derive(Parser)]
#[command(
    name = "pvdcov",
    version,
    about = "Pivotal-variable detection and two-stage covariance estimation for high-dimensional factor models",
    after_help = AFTER_HELP
)]
struct Cli {
    /// TOML configuration file (defaults apply when omitted)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed (overrides the config file)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; 0 = all cores
    #[arg(long, global = true, env = "PVDCOV_WORKERS")]
    workers: Option<usize>,

    /// Output directory (overrides the config file)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Use the published full-scale grids (hours of runtime)
    #[arg(long, global = true)]
    full: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Screening-accuracy grid (Models 1-2): Mean, SD, FP, FN, EQ per cell
    Table1 {
        /// Dimension p
        #[arg(long)]
        p: Option<usize>,
        /// Replicas per cell
        #[arg(long)]
        t: Option<usize>,
        /// Sample size n
        #[arg(long)]
        n: Option<usize>,
    },
    /// LOREC vs PVD-LOREC comparison: EU/RE per cell plus a timing cell
    Table2 {
        /// Replicas per cell
        #[arg(long)]
        t: Option<usize>,
    },
    /// POET vs PVD-POET sweep over p: plot-ready RE/EU means
    Figure1 {
        /// Replicas per cell
        #[arg(long)]
        t: Option<usize>,
    },
    /// Run one estimator on a CSV data matrix (rows = observations)
    Estimate {
        /// Input CSV file
        #[arg(long)]
        data: PathBuf,
        /// pvd | lorec | pvd-lorec | poet | pvd-poet | threshold
        #[arg(long)]
        method: Option<String>,
        /// First CSV row is a header with variable names
        #[arg(long)]
        has_header: bool,
        /// Adaptive-threshold constant
        #[arg(long)]
        c: Option<f64>,
        /// Number of factors (0 = eigenvalue-ratio choice)
        #[arg(long)]
        k: Option<usize>,
        /// LOREC nuclear-norm weight (requires --rho; 0 0 = automatic)
        #[arg(long)]
        lambda: Option<f64>,
        /// LOREC entrywise weight
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Subsample stability of the detected pivotal set on a CSV dataset
    Stability {
        /// Input CSV file
        #[arg(long)]
        data: PathBuf,
        /// Observations per subsample (without replacement)
        #[arg(long)]
        subsample_n: Option<usize>,
        /// Number of subsamples
        #[arg(long)]
        t: Option<usize>,
        /// Keep variables with sample SD >= sd_min
        #[arg(long)]
        sd_min: Option<f64>,
        /// Keep variables with sample SD <= sd_max
        #[arg(long)]
        sd_max: Option<f64>,
        /// After the interval filter keep the top_m variables by SD (0 = all)
        #[arg(long)]
        top_m: Option<usize>,
        /// First CSV row is a header with variable names
        #[arg(long)]
        has_header: bool,
    },
    /// Run the acceptance suite end to end (one pass/fail line per criterion)
    Selftest,
}

fn run(cli: Cli) -> CmdResult {
    let mut cfg = RunConfig::load(cli.config.as_deref()).map_err(CmdError::Config)?;
    if cli.full {
        cfg.apply_full_scale();
    }
    if let Some(seed) = cli.seed {
        cfg.common.seed = seed;
    }
    if let Some(workers) = cli.workers {
        cfg.common.workers = workers;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.common.out_dir = dir.display().to_string();
    }

    match &cli.command {
        Command::Table1 { p, t, n } => {
            if let Some(p) = p {
                cfg.table1.p = *p;
            }
            if let Some(t) = t {
                cfg.table1.t = *t;
            }
            if let Some(n) = n {
                cfg.table1.n = *n;
            }
        }
        Command::Table2 { t } => {
            if let Some(t) = t {
                cfg.table2.t = *t;
            }
        }
        Command::Figure1 { t } => {
            if let Some(t) = t {
                cfg.figure1.t = *t;
            }
        }
        Command::Estimate {
            method,
            has_header,
            c,
            k,
            lambda,
            rho,
            ..
        } => {
            if let Some(m) = method {
                cfg.estimate.method = m.clone();
            }
            if *has_header {
                cfg.estimate.has_header = true;
            }
            if let Some(c) = c {
                cfg.estimate.c = *c;
                cfg.estimate.universal_c = *c;
            }
            if let Some(k) = k {
                cfg.estimate.k = *k;
            }
            if let Some(l) = lambda {
                cfg.estimate.lambda = *l;
            }
            if let Some(r) = rho {
                cfg.estimate.rho = *r;
            }
        }
        Command::Stability {
            subsample_n,
            t,
            sd_min,
            sd_max,
            top_m,
            has_header,
            ..
        } => {
            if let Some(s) = subsample_n {
                cfg.stability.subsample_n = *s;
            }
            if let Some(t) = t {
                cfg.stability.t = *t;
            }
            if let Some(v) = sd_min {
                cfg.stability.sd_min = *v;
            }
            if let Some(v) = sd_max {
                cfg.stability.sd_max = *v;
            }
            if let Some(m) = top_m {
                cfg.stability.top_m = *m;
            }
            if *has_header {
                cfg.stability.has_header = true;
            }
        }
        Command::Selftest => {}
    }
    cfg.validate().map_err(CmdError::Config)?;

    let out_dir = PathBuf::from(&cfg.common.out_dir);
    match &cli.command {
        Command::Table1 { .. } => cmd_table1(&cfg, &out_dir),
        Command::Table2 { .. } => cmd_table2(&cfg, &out_dir),
        Command::Figure1 { .. } => cmd_figure1(&cfg, &out_dir),
        Command::Estimate { data, .. } => cmd_estimate(&cfg, &out_dir, data),
        Command::Stability { data, .. } => cmd_stability(&cfg, &out_dir, data),
        Command::Selftest => cmd_selftest(&cfg, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
