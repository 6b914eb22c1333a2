//! Batch front end: subcommands, experiment pipelines and report emission.

pub mod cli;
pub mod experiment;
pub mod report;

pub use cli::{main_with_args, Cli};
