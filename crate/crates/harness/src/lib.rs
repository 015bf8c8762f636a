//! Batch experiments over the benchmark suite: configuration, execution,
//! aggregation, comparison and reference-root generation.

pub mod config;
pub mod experiment;
pub mod oracle;
pub mod report;

pub use config::{Algorithm, ConfigError, ExperimentConfig};
pub use experiment::{
    cell_seed, report_json, resolve_problem, run_cell, run_experiment, write_outputs, CellError, ExperimentError,
    ExperimentResult, Indicators, ProblemSpec, RunReport, RunSettings, Trace,
};
pub use report::{compare, parse_summary_csv, rank, summarize, summary_csv, ReportError, SummaryRow};
