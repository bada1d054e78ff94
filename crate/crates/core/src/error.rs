use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Iterative method failed to converge, or a quadrature did not settle.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Grid too coarse to resolve the shape.
    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// A hard inequality check failed on a computed quantity.
    #[error("constraint violated [{check}]: {detail}")]
    Violation { check: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
