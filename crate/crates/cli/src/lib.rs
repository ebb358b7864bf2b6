//! Command-line front end for `complexdim`: spec parsing, subcommands and
//! artifact output.

pub mod commands;
pub mod error;
pub mod output;
pub mod spec;

pub use error::{CliError, ErrorKind};
