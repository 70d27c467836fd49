//! Simulation laboratory: the generative covariance models, evaluation
//! metrics (Mean/SD/EQ/FP/FN for screening, RE/EU for estimation) and a
//! seeded, replica-parallel Monte-Carlo runner whose reports are a pure
//! function of (grid, T, seeds) regardless of worker count.

mod metrics;
mod models;
mod report;
mod runner;

pub use metrics::{eu_metric, re_metric, re_metric_with, screening_metrics, ScreeningMetrics};
pub use models::{
    build_sigma, mix_seed, sample, ModelFamily, ModelOptions, ModelSpec, Sampler, SigmaTruth,
};
pub use report::{
    estimation_csv, figure_csv, reports_to_json, screening_csv, timing_csv, ExperimentReport,
    ReplicaRaw, SummaryStat,
};
pub use runner::{run_experiment, Cell, Method};
