use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NlsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("snapshot format: {0}")]
    Format(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl NlsError {
    /// True for failures of the computation itself (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, NlsError::Numerical(_))
    }
}

impl From<std::io::Error> for NlsError {
    fn from(e: std::io::Error) -> Self {
        NlsError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, NlsError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(NlsError::InvalidParameter(msg.into()))
}
