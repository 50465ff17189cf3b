//! Config-driven batch runs: simulate, embed, analyze, and write long-form
//! CSV or JSON with a manifest that is enough to re-run any cell.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{
    linear_report, run_embed, run_heuristics, run_isometry, run_linear_verify, run_simulate,
    run_sweep, task_seed, LinearReport, LinearRow, RunSummary,
};
pub use config::{AnalysisSpec, ExperimentConfig, Format, Heuristic, OutputSpec, PRESETS};
pub use output::{read_records, write_records, CellEntry, Manifest, Record, SCHEMA_VERSION};
