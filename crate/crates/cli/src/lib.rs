//! Scenario-driven front end for `chi2fc`: rate sweeps, correlation traces
//! and validity reports written as CSV / JSON next to a run manifest.

pub mod commands;
pub mod error;
pub mod output;
pub mod scenario;

pub use commands::{run_correlations, run_rate_sweep, run_validity, Manifest, RunOptions};
pub use error::{CliError, CliResult};
pub use scenario::{Resolved, Scenario, SCHEMA_VERSION};
