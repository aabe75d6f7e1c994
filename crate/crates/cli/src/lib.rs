//! Command-line front end for `gram-moments`: moment tables, density grids,
//! engine comparisons and Monte Carlo sample dumps.

pub mod commands;
pub mod config;
pub mod table;

pub use commands::{
    cmd_compare, cmd_density, cmd_moments, cmd_sample, run, write_output, Artifact,
};
pub use config::{Command, GridSpec, OutputFormat, RunConfig, SpectrumSource};
pub use table::{Table, Values};
