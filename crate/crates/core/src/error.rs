use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation would exceed a configured size limit.
    #[error("resource limit exceeded: {what} (limit {limit})")]
    Resource { what: String, limit: u64 },

    /// Malformed textual input.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(what: impl Into<String>, limit: u64) -> Self {
        Error::Resource {
            what: what.into(),
            limit,
        }
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
