//! Experiment runner for the extraction lab: configs, repeated seeded
//! trials, parameter sweeps and the `mexlab` command line.

pub mod cli;
pub mod config;
pub mod runner;
pub mod sweep;

pub use config::{AttackKind, ExperimentConfig, ModelKind, SweepAxis, SweepSpec};
pub use runner::{run_experiment, run_experiment_with, Aggregates, RunOptions, RunRecord, TrialRecord};
pub use sweep::{run_sweep, write_sweep_csv, SweepRow};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Invalid or unreadable configuration; nothing was run.
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] mexlab_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
