use alloc::string::String;

/// Failure while evaluating a residual map.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero in residual component {0}")]
    DivisionByZero(usize),
    #[error("residual is not finite at the evaluation point")]
    NonFinite,
    #[error("point coincides with a deflated root")]
    UndefinedAtRoot,
    #[error("no analytic Jacobian available")]
    NoJacobian,
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}
