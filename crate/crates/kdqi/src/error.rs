//! Error type shared by every module in the crate.

use std::fmt;

/// Crate-wide error enum. Variants mirror the failure classes of the public
/// operations rather than their call sites, so callers can match on kind.
#[derive(Debug)]
pub enum Error {
    /// A spectrum or kernel was used on a domain it was not built for.
    DomainMismatch(String),
    /// An amplitude vector could not be normalized (zero or non-finite norm).
    Normalization(String),
    /// A parameter was out of range or inconsistent with the others.
    Argument(String),
    /// A matrix that must be unitary failed the check tolerance.
    Unitarity(String),
    /// A randomized construction (e.g. code sampling) exhausted its repair budget.
    Construction(String),
    /// A bracketing or iterative search failed to locate its target.
    Search(String),
    /// Serialization or file I/O failure.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DomainMismatch(m) => write!(f, "domain mismatch: {m}"),
            Error::Normalization(m) => write!(f, "normalization: {m}"),
            Error::Argument(m) => write!(f, "invalid argument: {m}"),
            Error::Unitarity(m) => write!(f, "unitarity: {m}"),
            Error::Construction(m) => write!(f, "construction: {m}"),
            Error::Search(m) => write!(f, "search: {m}"),
            Error::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
