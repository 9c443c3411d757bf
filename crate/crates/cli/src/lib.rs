//! Library surface of the experiment harness, shared by the binary and the
//! integration tests.

pub mod commands;
pub mod config;

pub use commands::{RunError, Runner};
pub use config::{ExperimentConfig, Mode};
