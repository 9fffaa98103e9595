//! Discrete total-variation regularization on `d`-dimensional grids.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banach;
pub mod curvature;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod oracles;
pub mod solver;

pub use error::{Error, Result};
