//! Error taxonomy shared by every module.
//!
//! Three kinds matter to callers: `Usage` (the request itself is malformed),
//! `Capacity` (the request is well-formed but exceeds a documented cap or
//! budget) and `Numerical` (an iterative routine failed to converge). The
//! CLI maps these onto distinct exit codes.

use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed request: family mismatch, bad literal, invalid parameter.
    Usage(String),
    /// Request exceeds a documented cap or budget; the message names it.
    Capacity(String),
    /// An iterative numerical routine did not reach its tolerance.
    Numerical(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Usage(_) => ErrorKind::Usage,
            Error::Capacity(_) => ErrorKind::Capacity,
            Error::Numerical(_) => ErrorKind::Numerical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Capacity,
    Numerical,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Usage(m) => write!(f, "usage error: {m}"),
            Error::Capacity(m) => write!(f, "capacity error: {m}"),
            Error::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
