//! Experiment orchestration: configuration, run artifacts, plots and reports.

pub mod config;
pub mod io;
pub mod plot;
pub mod report;
pub mod run;

pub use config::{Algo, EnvSpec, ExperimentConfig, RunSpec};
pub use io::{load_run, read_rows, save_run, write_rows};
pub use report::{comparison_table, load_summaries, summarize, RunSummary};
pub use run::{evaluate, run_matrix, run_one, MatrixEntry, PlannedPath, RunOutput};
