//! Command-line front end: JSON graph documents in, reports and documents out.

pub mod args;
pub mod commands;
pub mod demo;
pub mod document;
pub mod error;

pub use commands::run;
pub use error::CliError;
