use thiserror::Error;

/// Failure classes shared by every module.
///
/// The CLI maps these onto its exit-code contract, so new variants should
/// be slotted into one of the existing classes rather than invented ad hoc.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("decode failed: {0}")]
    Decode(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("search failed after {attempts} attempts")]
    SearchFailed { attempts: usize },
    #[error("no preimage found")]
    NotFound,
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn resource<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Resource(msg.into()))
}
