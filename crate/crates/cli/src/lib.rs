//! File formats, configuration and subcommands for the `armlqr` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::{Category, CliError, Result};
