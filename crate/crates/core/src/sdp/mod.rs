//! Dense primal-dual interior-point solver for block-diagonal SDPs.

mod format;
mod ipm;
mod presolve;
mod problem;

pub use format::{read_problem, write_problem};
pub use ipm::{original_residuals, solve, Residuals, SdpSolution, SolverOptions, SolverStatus};
pub use presolve::{presolve, PresolveReport, Presolved};
pub use problem::{min_eigenvalue, SdpProblem, Sense, SparseBlockMatrix};
