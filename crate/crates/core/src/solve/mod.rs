//! Linear solves, field evaluation, and error metrics.

pub mod field;
pub mod manufactured;
pub mod solver;

pub use field::{fit_slope, improvement_factor, AnalysisError, ConvergenceTable, ErrorReport, EvalError, SolutionField};
pub use manufactured::{manufactured_library, Manufactured, ScalarSolution, VectorSolution};
pub use solver::{bicgstab, gmres, solve, solve_dense, Solution, SolveError, SolverOptions};
