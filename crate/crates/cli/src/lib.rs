//! Library side of the `ipiag` command: run configurations, comparison
//! tables, certificates and the small SVG plotter they share.

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;

pub use error::{CliError, Result};
