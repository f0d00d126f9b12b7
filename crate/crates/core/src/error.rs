use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid parameters or configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// The input is structurally valid but degenerate for the operation.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// A numerical procedure failed to converge.
    #[error("numeric failure: {message} (diagnostic {diagnostic:e})")]
    Numeric { message: String, diagnostic: f64 },
    /// The requested size exceeds the memory budget.
    #[error("memory bound exceeded: {message}; try N <= {suggested}")]
    MemoryBound { message: String, suggested: usize },
    /// Malformed serialized data.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
