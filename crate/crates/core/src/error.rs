use thiserror::Error;

/// Errors raised by the library. Non-convergence of an iterative solver is
/// not an error: it is reported through `SolverReport::converged`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric positive definite (pivot {pivot:e} at row {row})")]
    NotSpd { row: usize, pivot: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("root finding did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("unknown penalty `{0}`")]
    UnknownPenalty(String),

    #[error("penalty `{0}` has an evaluator only, no solver")]
    UnsupportedPenalty(String),

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("relative error undefined for a zero ground truth")]
    ZeroTruth,

    #[error("submatrix is rank deficient")]
    RankDeficient,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
