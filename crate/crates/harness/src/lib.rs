//! Experiment harness: configuration, deterministic parallel simulation,
//! exact and bound commands, and figure output.

pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod grids;
pub mod output;
pub mod simulate;
pub mod svg;

pub use config::{ExperimentConfig, Model, Reference, Statistic};
pub use error::{ErrorKind, HarnessError, HarnessResult};
