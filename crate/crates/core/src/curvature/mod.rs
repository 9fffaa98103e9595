//! Exact minimization of `Per(F) − ∫_F g` in the anisotropic perimeter, the
//! λ-sweep construction of variational curvature, and minimality certificates.

mod certify;
mod cut;
mod maxflow;
mod sweep;

pub use certify::{
    check_level_set_minimality, compare_ball_residual, density_estimate_profile, DensityRow, LevelSetCheck,
};
pub use cut::{min_cut_geometric, CutProblem, CutResult};
pub use sweep::{geometric_lambdas, lambda_sweep_grid, GridSweep, GridSweepOptions};
