//! Experiment harness behind the `treelocate` binary: configuration,
//! network and observation files, the experiment runners and result
//! emission.

pub mod config;
pub mod emit;
pub mod error;
pub mod experiments;
pub mod network;

pub use config::{ExperimentConfig, Format, Settings};
pub use emit::{Cell, Report, Table};
pub use error::CliError;
