//! Error type shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain of an operation (non-positive frequency,
    /// zero-order prototype, empty sweep grid, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A divider topology the synthesis stage cannot build.
    #[error("unsupported topology: {0}")]
    Topology(String),

    /// Linear-algebra failure during a frequency sweep; reports the
    /// frequency at which the system became singular.
    #[error("numeric failure at {freq_hz} Hz: {message}")]
    Numeric { freq_hz: f64, message: String },

    /// Malformed text input (netlist or Touchstone); line numbers are 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Synthesis target outside the achievable bracket.
    #[error("target {target} outside achievable range [{lo}, {hi}]")]
    Range { target: f64, lo: f64, hi: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
