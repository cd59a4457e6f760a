//! Command-line front end, parallel executor and report formats for
//! `permpack-core`.

pub mod cli;
pub mod error;
pub mod exec;
pub mod report;

pub use error::CliError;
pub use exec::Parallel;
