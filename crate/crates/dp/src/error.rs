//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or mismatched inputs (mesh/field/rule).
    #[error("configuration error: {0}")]
    Config(String),

    /// Programming-contract violation (index out of range, wrong dimension).
    #[error("logic error: {0}")]
    Logic(String),

    /// An iterative scheme failed to converge or stagnated.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Singular flux point or singular linear system.
    #[error("singular: {0}")]
    Singular(String),

    /// A user-supplied nonlinearity produced a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// An invariant guaranteed by theory was violated at runtime.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 1 config, 2 check failure, 3 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 3,
            _ => 1,
        }
    }
}
