//! Scenario files, table formats and the runner behind the `sweetspot`
//! binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod formats;
pub mod runner;

pub use config::{ConfigError, ScenarioConfig};
pub use runner::{compare, run, Method};
