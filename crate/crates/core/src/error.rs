use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown function `{name}` at byte {pos}")]
    UnknownFunction { name: String, pos: usize },

    #[error("exponent at byte {pos} is not an integer constant (use sqrt for half powers)")]
    NonIntegerExponent { pos: usize },

    #[error("variable `{0}` is not registered")]
    Unregistered(String),

    #[error("variable `{0}` has no value")]
    Unbound(String),

    #[error("domain violation in `{subterm}`: {msg}")]
    Domain { subterm: String, msg: String },

    #[error("division by zero in `{0}`")]
    DivisionByZero(String),

    #[error("every sampled point hit a pole or domain violation ({attempts} attempts)")]
    NoAdmissiblePoint { attempts: usize },

    #[error("degree overflow: {0}")]
    Degree(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
