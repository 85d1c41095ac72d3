//! Configuration, figure presets and run orchestration for the `simlab`
//! command-line tool.

pub mod config;
pub mod error;
pub mod presets;
pub mod runner;

pub use config::{Engine, ExperimentConfig, PlacementName};
pub use error::{CliError, Result};
pub use presets::{preset, Figure, Variant};
pub use runner::{chaos_at_peak, run_experiment, run_mixing, run_sweep, ChaosPoint, RunManifest, RunOptions, RunOutcome};
