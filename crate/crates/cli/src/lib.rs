//! Batch front end: configuration resolution, experiment dispatch and
//! table I/O for the `udn` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod io;

use std::fmt;

pub use commands::run;
pub use config::{Command, ExperimentSpec, Format, Resolved};

/// Failure classes, each tied to a process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, unknown key, unreadable input. Exit code 2.
    Config(String),
    /// A model routine failed. Exit code 3.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<udn_core::Error> for CliError {
    fn from(e: udn_core::Error) -> Self {
        use udn_core::Error as E;
        match e {
            E::InvalidParameter { .. } | E::Domain(_) => CliError::Config(e.to_string()),
            E::Numeric { .. } | E::Assumption { .. } | E::Infeasible(_) => CliError::Numeric(e.to_string()),
        }
    }
}
