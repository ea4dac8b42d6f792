//! State files, report formatting, the batch runner and the `entlab` command
//! line on top of `entlab-core`.

pub mod batch;
pub mod cli;
pub mod commands;
pub mod error;
pub mod generate;
pub mod report;
pub mod statefile;

pub use error::CliError;
