//! Monte Carlo sweeps, result files and the command-line front end.

pub mod cli;
pub mod config;
pub mod output;
pub mod sweep;
pub mod validate;

pub use config::{ConfigFile, ExperimentConfig, SweepVariable};
pub use output::{write_realizations, write_results};
pub use sweep::{run_sweep, PointSummary, RealizationRecord, SweepResult};
