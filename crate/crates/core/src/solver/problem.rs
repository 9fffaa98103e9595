use super::operator::{ForwardOperator, OperatorKind};
use crate::error::{ensure_finite, Error, Result};
use crate::grid::{Grid, PerimeterMode};

/// `min_u (1/σ)‖A u − f − w‖_q^σ + α TV(u)`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    op: ForwardOperator,
    f: Vec<f64>,
    w: Vec<f64>,
    alpha: f64,
    q: f64,
    sigma: f64,
    mode: PerimeterMode,
}

impl ProblemSpec {
    /// Supported fidelities: `q = σ = 2` with any operator, and `q = σ` with the identity.
    pub fn new(
        op: ForwardOperator,
        f: Vec<f64>,
        w: Vec<f64>,
        alpha: f64,
        q: f64,
        sigma: f64,
        mode: PerimeterMode,
    ) -> Result<Self> {
        let m = op.data_len();
        if f.len() != m || w.len() != m {
            return Err(Error::InvalidArgument(format!("data vectors must have length {m}")));
        }
        ensure_finite(&f, "data f")?;
        ensure_finite(&w, "noise w")?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        if !(q > 1.0 && q.is_finite() && sigma > 1.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("need q, σ in (1, ∞), got ({q}, {sigma})")));
        }
        let quadratic = q == 2.0 && sigma == 2.0;
        let separable = q == sigma && op.kind() == OperatorKind::Identity;
        if !(quadratic || separable) {
            return Err(Error::Unsupported(format!("q = {q}, σ = {sigma} with a {:?} operator", op.kind())));
        }
        Ok(Self { op, f, w, alpha, q, sigma, mode })
    }

    /// Denoising `f + w` with `q = σ = 2`.
    pub fn denoising(f: &crate::grid::ScalarField, w: Option<&[f64]>, alpha: f64, mode: PerimeterMode) -> Result<Self> {
        let n = f.grid().len();
        let w = w.map_or_else(|| vec![0.0; n], |w| w.to_vec());
        Self::new(ForwardOperator::identity(f.grid().clone()), f.values().to_vec(), w, alpha, 2.0, 2.0, mode)
    }

    pub fn grid(&self) -> &Grid {
        self.op.grid()
    }

    pub fn operator(&self) -> &ForwardOperator {
        &self.op
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// `f + w`.
    pub fn data(&self) -> Vec<f64> {
        self.f.iter().zip(&self.w).map(|(a, b)| a + b).collect()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mode(&self) -> PerimeterMode {
        self.mode
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.op.clone(), self.f.clone(), self.w.clone(), alpha, self.q, self.sigma, self.mode)
    }

    pub fn with_noise(&self, w: Vec<f64>) -> Result<Self> {
        Self::new(self.op.clone(), self.f.clone(), w, self.alpha, self.q, self.sigma, self.mode)
    }

    /// `‖y‖_q` in `Y`.
    pub fn data_norm(&self, y: &[f64]) -> f64 {
        weighted_norm(y, self.q, self.op.data_weight())
    }

    /// `‖p‖_{q'}` in `Y*`.
    pub fn dual_data_norm(&self, p: &[f64]) -> f64 {
        weighted_norm(p, self.q / (self.q - 1.0), self.op.data_weight())
    }

    /// `(1/σ)‖A u − f − w‖_q^σ`.
    pub fn fidelity(&self, au: &[f64]) -> f64 {
        let r: Vec<f64> = au.iter().zip(self.f.iter().zip(&self.w)).map(|(a, (f, w))| a - f - w).collect();
        self.data_norm(&r).powf(self.sigma) / self.sigma
    }
}

pub(crate) fn weighted_norm(y: &[f64], q: f64, weight: f64) -> f64 {
    let m = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * (weight * y.iter().map(|v| (v.abs() / m).powf(q)).sum::<f64>()).powf(1.0 / q)
}
