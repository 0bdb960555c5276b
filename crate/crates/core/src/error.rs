use thiserror::Error;

/// Errors raised anywhere in the laboratory. The CLI maps them onto exit
/// codes through [`Error::is_cap`] and [`Error::is_validation`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error("enumeration too large: {0}")]
    EnumerationTooLarge(String),
    #[error("simulator cap exceeded: {0}")]
    SimulatorCap(String),
    #[error("composition mismatch: {0}")]
    Composition(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("cannot condition on a zero-probability event: {0}")]
    Conditioning(String),
    #[error("interpolation failed: {0}")]
    Interpolation(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("search error: {0}")]
    Search(String),
    #[error("not enumerable: {0}")]
    NotEnumerable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by exceeding an enumeration or simulator cap.
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::EnumerationTooLarge(_) | Error::SimulatorCap(_))
    }

    /// True for errors caused by bad user-supplied parameters.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parameter(_)
                | Error::Composition(_)
                | Error::Dimension(_)
                | Error::NotEnumerable(_)
                | Error::Interpolation(_)
                | Error::Conditioning(_)
                | Error::ContractViolation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
