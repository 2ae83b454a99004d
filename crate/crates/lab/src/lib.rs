//! Experiment harness for holonomic gate simulations: configuration,
//! parameter sweeps and CSV output.

pub mod config;
pub mod csv;
pub mod error;
pub mod experiment;
pub mod report;

pub use config::{ExperimentConfig, Figure, Preset};
pub use error::LabError;
pub use experiment::{run_experiment, Experiment, ExperimentOutput};
