//! Finite-dimensional Banach-space geometry: weighted `ℓ^p` norms, duality maps,
//! moduli of convexity, generalized projections and the parameter-choice rule.

pub mod huber;
mod modulus;
mod projection;
mod space;

pub use huber::{huber_gauge_norm, huber_polar_norm};
pub use modulus::{
    estimate_modulus, estimate_norm_power_modulus, monotonicity_gap, parameter_choice_check, rho_by_bisection,
    rho_stability, ConvexityModulus, ParameterVerdict, SampledModulus,
};
pub use projection::{generalized_projection, BoxSet, ConvexSet, Projection, ProjectionOptions};
pub use space::{conjugate, v_functional, PNormSpace};
