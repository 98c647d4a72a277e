use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A grid cell succeeded where a non-retrievability certificate holds.
    /// The completed run is carried along so callers can still inspect it.
    #[error("certified-cell sentinel tripped in {} cell(s)", .0.violations.len())]
    Sentinel(Box<crate::harness::GridRun>),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dimension(msg.into()))
}

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
