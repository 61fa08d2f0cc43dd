use thiserror::Error;

/// Errors raised by constructors, prox evaluations and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid schedule: {name} = {value} lies outside the admissible interval [{lo}, {hi}]")]
    InvalidSchedule {
        name: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("bracketing failure: no sign change found on [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },

    #[error("infeasible bracket: objective is not finite anywhere on [{lo}, {hi}]")]
    InfeasibleBracket { lo: f64, hi: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported function: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
