//! Configuration, caching and artifact emission for the `hecke` command-line tool.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod report;
pub mod svg;

pub use commands::{dispatch, Command, Outcome};
pub use config::{RepSpec, RunConfig};
pub use error::{CliError, CliResult};
