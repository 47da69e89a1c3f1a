//! Command-line front end for the `clipbandit` simulation library.
//!
//! Configs are TOML files (see [`config`]); named published experiments live in
//! [`presets`]. Results are written by [`emit`] as CSV, JSON and plot data.

pub mod commands;
pub mod config;
pub mod emit;
pub mod error;
pub mod presets;

pub use commands::{execute, Cli, Command};
pub use config::{parse_config, parse_str, RunConfig};
pub use error::{CliError, Result};
