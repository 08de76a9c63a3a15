//! Experiment harness for the robust game option pricer: JSON run configs,
//! table / convergence / stopping-region drivers, CSV and SVG output.

pub mod config;
pub mod error;
pub mod harness;
pub mod output;

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use harness::{Artifacts, Comparator};
