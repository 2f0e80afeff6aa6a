use thiserror::Error;

/// Errors raised by constructions. Property violations are never errors:
/// checkers return reports instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed data: dangling labels, mismatched bases, broken invariants.
    #[error("structural error: {0}")]
    Structural(String),
    /// A supplied morphism or action does not satisfy its defining law.
    #[error("validation error: {0}")]
    Validation(String),
    /// The search bound was too small to decide.
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    /// The tabulated functor is provably outside the class being recovered.
    #[error("not analytic: {0}")]
    NotAnalytic(String),
    /// An internal consistency check failed; indicates a bug.
    #[error("inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Structural(msg.into()))
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
