//! Crate-wide error type.
//!
//! Two kinds are distinguished because callers (in particular the CLI) map
//! them to different exit codes: domain errors are precondition violations
//! (bad parameters, unsupported shapes), resource errors are exceeded search
//! or memory budgets. Verification *failures* are not errors — they are
//! ordinary data (failed clauses in a report, or a structured failure report
//! from an algorithm that could not reach its conclusion).

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configured search/memory budget was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// An iterative numeric routine failed to converge within its cap.
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

impl Error {
    /// Build a domain error from anything displayable.
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Build a resource error from anything displayable.
    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    /// Build a no-convergence error from anything displayable.
    pub fn no_convergence(msg: impl Into<String>) -> Self {
        Error::NoConvergence(msg.into())
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
