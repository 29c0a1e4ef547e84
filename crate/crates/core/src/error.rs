use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Hermitian (max |H - H^†| entry = {0:.3e})")]
    NotHermitian(f64),
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("objective has odd degree {0}")]
    OddDegree(u32),
    #[error("point is not on the unit sphere (|x|^2 - 1 = {0:.3e})")]
    NotOnSphere(f64),
    #[error("Buchberger S-polynomial degree {degree} exceeds the cap {cap}")]
    CapExceeded { degree: u32, cap: u32 },
    #[error("moment matrix side {side} exceeds the limit {limit}")]
    SizeOverflow { side: u64, limit: u64 },
    #[error("certificate shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dual solution is infeasible: {0}")]
    DualInfeasible(String),
    #[error("inconsistent constraints: {0}")]
    InconsistentConstraints(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("solver did not reach an optimal solution: {0}")]
    SolverFailure(String),
    #[error("net enumeration supports at most 4 variables, got {0}")]
    TooManyVariables(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
