//! Command-line harness around B-CPACE: train, evaluate, benchmark, diagnose.
//!
//! Experiments are described by a versioned TOML [`ExperimentSpec`]. Tables are
//! written as CSV and diagnostics as JSON under the spec's output directory.

pub mod commands;
pub mod diag;
pub mod error;
pub mod results;
pub mod spec;

pub use commands::{
    bench, check_budget, eval, eval_dir, eval_seed, latent_table, load_estimate, train,
    BenchReport, EvalReport, EvalRequest, TrainSummary,
};
pub use diag::{diag, DiagReport};
pub use error::{CliError, Result, EXIT_ARTIFACT, EXIT_BUDGET, EXIT_CONFIG};
pub use results::{read_csv, EpisodeRecord, ResultRow, EPISODE_HEADER, RESULT_HEADER};
pub use spec::{DiagSpec, EvalSpec, ExperimentSpec, OutputSpec, PolicyName, SPEC_VERSION};
