//! The training loop: synthetic clients, attacks, the chosen defense or
//! the secure check, and per-round metrics.

pub mod config;
pub mod data;
mod runner;

pub use config::{
    CheckConfig, DataConfig, DistributionSpec, ExperimentConfig, ModelConfig, PopulationConfig,
    ShiftEvent, ShiftKind, SweepConfig,
};
pub use data::{dirichlet_partition, gen_synthetic};
pub use runner::{
    apply_shift, run_experiment, write_metrics_csv, Client, Experiment, ExperimentResult, Population,
    RoundMetrics, RunOptions,
};
