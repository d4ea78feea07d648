use thiserror::Error;

/// Errors raised by the construction and verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vector length {0} is not a triangular number n(n+1)/2")]
    LengthNotTriangular(usize),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("eigenvalue gap |lambda_r - lambda_(r+1)| = {gap:e} at r = {r} is too small to define the projector")]
    DegenerateGap { r: usize, gap: f64 },

    #[error("projector diagonal entry P[{index}][{index}] = {value:e} is (numerically) zero")]
    DegenerateDiagonal { index: usize, value: f64 },

    #[error("Schur split identity violated by {residual:e}")]
    InconsistentInputs { residual: f64 },

    #[error("frame does not span R^{r}: numerical rank {rank}")]
    RankDeficient { r: usize, rank: usize },

    #[error("no degree-4 extension: N = {n} >= r(r+1)/2 = {bound}")]
    InfeasibleDimension { n: usize, bound: usize },

    #[error("conditioning constraints are inconsistent (residual {residual:e})")]
    InconsistentConstraints { residual: f64 },

    #[error("dimension {dim} exceeds the budget of {budget}")]
    DimBudgetExceeded { dim: usize, budget: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
