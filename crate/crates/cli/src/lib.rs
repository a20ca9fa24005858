//! Experiment runners behind the `formxray` command line.
//!
//! Each subcommand is one [`experiments::run`] call on an
//! [`config::ExperimentConfig`], producing a JSON [`report::Report`].

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{Command, ExperimentConfig};
pub use experiments::{run, RunError};
pub use report::Report;
