//! Configuration loading and the experiment runner behind the `phs` binary.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;

pub use config::{load_config, ConfigError, ExperimentConfig, Overrides};
pub use run::{run_experiment, RunOutcome};
