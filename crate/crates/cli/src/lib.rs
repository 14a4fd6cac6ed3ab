//! File formats, the parallel experiment runner, and the `cipherchain`
//! command line on top of [`cipherchain_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod report;
pub mod runner;

pub use error::{CliError, Result};
