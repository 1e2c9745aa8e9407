//! Command-line driver: configuration, file formats, result documents and
//! the `ptransform` subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod results;

pub use commands::{run, Cli, Command};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use io::{read_series, write_series, SeriesFormat};
pub use manifest::RunManifest;
pub use results::{write_results, EstimateDocument};
