use thiserror::Error;

/// Errors raised by the library.
///
/// Variants are grouped by cause so that front ends can map them onto exit
/// codes: [`Error::Usage`] is a caller mistake, everything else is a
/// numeric-domain failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A count or index does not fit the integer type used to hold it.
    #[error("range error: {0}")]
    Range(String),

    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Arguments disagree with each other (lengths, dimensions).
    #[error("usage error: {0}")]
    Usage(String),

    /// The simplex is degenerate or otherwise unusable.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// The requested quadrature rule is not available.
    #[error("capability error: {0}")]
    Capability(String),

    /// A required hypothesis such as `k > n/2` does not hold.
    #[error("hypothesis error: {0} does not hold")]
    Hypothesis(String),

    /// A semi-norm provider could not answer a query.
    #[error("semi-norm provider error: {0}")]
    Provider(String),

    /// Malformed JSON input document.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
