//! File formats, output writers and subcommand drivers on top of
//! `iga-mortar-core`.

pub mod commands;
pub mod error;
pub mod geometry_file;
pub mod output;

pub use error::{CliError, Result};
