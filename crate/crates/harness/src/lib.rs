//! Monte-Carlo runner, report emission and command-line interface for the
//! KLJN attack laboratory.

// `!(x > 0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod report;
pub mod runner;
pub mod spec;

pub use cli::cli_main;
pub use error::HarnessError;
pub use report::{emit_report, MonteCarloReport, ParamValue, ReportPoint, ReportTable, RunSummary};
pub use runner::{run_experiment, run_experiment_with_threads, run_sweep, SweepParam};
pub use spec::{AttackId, ExperimentSpec, Knowledge, OutputFormat, SchemeKind};
