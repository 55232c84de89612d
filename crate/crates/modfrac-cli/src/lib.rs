//! Command-line front end for modfrac.
//!
//! Exit codes: 0 success, 1 a reported check failed, 2 usage, 3 violated
//! precondition, 4 numeric failure.

pub mod commands;
pub mod config;
pub mod output;
pub mod plotdata;
pub mod verify;

use std::fmt;

/// Bad flags or configuration detected after clap's own parsing.
#[derive(Debug, Clone)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<modfrac::Error>() {
        Some(modfrac::Error::Numeric(_)) => EXIT_NUMERIC,
        Some(_) => EXIT_PRECONDITION,
        // I/O and serialization
        None => EXIT_NUMERIC,
    }
}
