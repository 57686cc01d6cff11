//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the toolkit.
///
/// `Input`, `Config` and `Model` describe problems with what the caller asked
/// for (bad arguments, invalid experiment configuration, a kernel that is not
/// a covariance on the requested grid). `Numeric` and `Statistics` describe
/// failures of the computation itself (non-convergence, degenerate fits).
#[derive(Debug, Error)]
pub enum Error {
    /// Arguments violate an operation's precondition.
    #[error("invalid input: {0}")]
    Input(String),
    /// An experiment configuration is inconsistent or incomplete.
    #[error("configuration error: {0}")]
    Config(String),
    /// A noise model is not a valid covariance for the requested use.
    #[error("model error: {0}")]
    Model(String),
    /// A numerical routine failed to reach its target.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A statistical estimate is degenerate or unusable.
    #[error("statistics error: {0}")]
    Statistics(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status for command-line front ends: configuration-class
    /// errors map to 2, numeric/statistical failures to 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Config(_) | Error::Model(_) => 2,
            Error::Numeric(_) | Error::Statistics(_) => 3,
        }
    }
}
