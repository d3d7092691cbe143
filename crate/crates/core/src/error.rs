use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The graph violates a structural precondition (e.g. a vertex without
    /// successors handed to Howard's algorithm).
    #[error("structural error: {0}")]
    Structural(String),

    /// A postcondition of an internal step failed. Indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),

    /// A kernel broke the engine's write-set discipline.
    #[error("kernel contract violated: {0}")]
    Contract(String),

    #[error("fixpoint did not converge within {bound} iterations")]
    Divergence { bound: usize },

    #[error("state space exceeds cap: {count} vertices discovered, cap is {cap}")]
    CapExceeded { count: usize, cap: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
