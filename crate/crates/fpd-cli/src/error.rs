//! CLI error taxonomy and process exit codes.

use std::fmt;

/// What went wrong, bucketed by exit code: configuration and input problems
/// exit 2, numeric failures exit 3, missed design targets under
/// `report --strict` exit 4.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Targets(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Targets(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Numeric(m) => write!(f, "{m}"),
            CliError::Targets(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<fpd_core::Error> for CliError {
    fn from(err: fpd_core::Error) -> Self {
        match err {
            e @ fpd_core::Error::Numeric { .. } | e @ fpd_core::Error::Range { .. } => {
                CliError::Numeric(e.to_string())
            }
            e => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Config(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
