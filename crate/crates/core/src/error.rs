use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{0} is only supported in anisotropic mode")]
    RequiresAnisotropic(&'static str),

    #[error("unsupported problem configuration: {0}")]
    Unsupported(String),

    #[error("infeasible constraint: {0}")]
    Infeasible(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("argument {value} outside the sampled range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("nesting violated: {0}")]
    NestingViolation(String),

    #[error("far-apart hypothesis violated; oracle invalid (separation {separation} <= D = {bound})")]
    NotFarApart { separation: f64, bound: f64 },

    #[error("dual certificate has no edge field")]
    MissingDualField,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
