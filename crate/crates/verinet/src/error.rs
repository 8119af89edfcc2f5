use thiserror::Error;

/// Errors raised anywhere in the workbench.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("exact evaluation is not available: {0}")]
    ExactMode(String),
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("dialect violation: {0}")]
    Dialect(String),
    #[error("unbound name: {0}")]
    Unbound(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("arity mismatch: expected {expected}, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("automaton is not weak: {0}")]
    NotWeak(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
