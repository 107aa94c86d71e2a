//! Scenario-driven runner for MTSFM synthesis, optimization and evaluation.

// `!(x > 0.0)` style guards are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod files;
pub mod report;

pub use config::{Overrides, ScenarioConfig};
pub use error::{CliError, Result};
