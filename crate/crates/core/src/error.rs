use thiserror::Error;

use crate::cascade::Stv;

/// Errors raised by the library. Violations that are reported as data
/// (validation lists, family mismatches) never go through this type.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(u32),

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid attachment at {0}: {1}")]
    InvalidAttachment(Stv, String),

    #[error("diagram is redundant: primary {0} is also a secondary vertex")]
    Redundant(Stv),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("inexact coefficient: {0}")]
    Exactness(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("not in the domain of the root bijection: {0}")]
    BijectionDomain(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by malformed input rather than a violated
    /// mathematical precondition.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
