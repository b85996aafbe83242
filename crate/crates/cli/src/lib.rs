//! Command-line driver for `meanzero-core`: bound evaluation, extremal
//! dumps, verification campaigns, discrete searches and monotonicity checks.

pub mod commands;
pub mod error;
pub mod report;
pub mod weight_spec;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};
