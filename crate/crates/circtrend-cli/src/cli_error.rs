//! CLI-level error classification driving the process exit code.

use std::fmt;

/// Validation failures (bad flags, config, input files) exit with code 2;
/// numerical failures (factorization, degenerate criteria) with code 3.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// Wraps a library error arising in a computation stage.
pub fn numerical(err: circtrend::Error) -> CliError {
    CliError::Numerical(err.to_string())
}

/// Wraps a library error arising while validating inputs.
pub fn invalid(err: circtrend::Error) -> CliError {
    CliError::Validation(err.to_string())
}

pub fn io_err(context: &str, err: std::io::Error) -> CliError {
    CliError::Validation(format!("{context}: {err}"))
}

pub type CliResult<T> = Result<T, CliError>;
