//! Library side of the `groupcut` command-line tool: function documents,
//! verdict documents and the subcommands.

pub mod commands;
pub mod document;
pub mod error;
pub mod plot;

pub use error::CliError;
