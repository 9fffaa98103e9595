//! Primal-dual solver for TV-regularized inverse problems.

mod gradient;
mod multilevel;
mod operator;
mod pdhg;
mod problem;
mod sequence;

pub use gradient::EdgeField;
pub use multilevel::{coarsen_grid, restrict_average, solve_multilevel};
pub use operator::{DenseMatrix, ForwardOperator, LinearMap, OperatorKind};
pub use pdhg::{
    dual_objective, solve, solve_from, subgradient_residual, write_history_csv, DualValue, GapRecord, Solution,
    SolveOptions,
};
pub use problem::ProblemSpec;
pub use sequence::{solve_sequence, support_radius, ScheduleEntry, SequenceOptions, SequenceResult, SequenceRow};
