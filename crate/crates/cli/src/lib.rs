//! Experiment layer over the cat-code simulator: flat TOML configs in,
//! deterministic CSV files out.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{AlphaGrid, ConfigError, ExperimentConfig, ExperimentKind};
pub use experiments::{
    chain_perr, optimize_alpha, run_cavity_scan, run_experiment, run_loss_sweeps,
    run_lossless_repeat, run_outcome_hist, run_wigner_compare, uncorrected_perr, RunArtifacts,
    RunError, SweepRecord,
};
