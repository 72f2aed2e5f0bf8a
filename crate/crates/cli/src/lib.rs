//! Instance/report file handling shared by the `optdiscrim` binary and its
//! integration tests.

pub mod instance;
pub mod report;

use std::fmt;

/// Error categories mapped to exit codes: parse/validation failures exit 1,
/// solver non-convergence exits 2.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Validation(String),
    NonConvergence(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {}", m),
            CliError::Validation(m) => write!(f, "validation error: {}", m),
            CliError::NonConvergence(m) => write!(f, "solver did not converge: {}", m),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Validation(_) => 1,
            CliError::NonConvergence(_) => 2,
        }
    }
}
