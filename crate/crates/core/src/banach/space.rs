use crate::error::{ensure_finite, Error, Result};

/// Weighted `ℓ^p`: `‖x‖ = (Σ w_i |x_i|^p)^(1/p)`, paired with its dual through `Σ w_i v_i x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PNormSpace {
    p: f64,
    weights: Vec<f64>,
}

impl PNormSpace {
    pub fn new(p: f64, weights: Vec<f64>) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidArgument(format!("exponent must lie in (1, inf), got {p}")));
        }
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidArgument("weights must be positive and finite".into()));
        }
        Ok(Self { p, weights })
    }

    /// `n` coordinates sharing the quadrature weight `w`.
    pub fn uniform(p: f64, n: usize, w: f64) -> Result<Self> {
        Self::new(p, vec![w; n])
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `p' = p / (p - 1)`.
    pub fn dual_exponent(&self) -> f64 {
        conjugate(self.p)
    }

    /// The dual space: exponent `p'`, same weights.
    pub fn dual(&self) -> PNormSpace {
        PNormSpace { p: self.dual_exponent(), weights: self.weights.clone() }
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("vector of length {} in a space of dimension {}", x.len(), self.dim())))
        }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if m == 0.0 {
            return 0.0;
        }
        // Scale by the max entry so large exponents do not overflow.
        let s: f64 = x.iter().zip(&self.weights).map(|(v, w)| w * (v.abs() / m).powf(self.p)).sum();
        m * s.powf(1.0 / self.p)
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.norm(&diff)
    }

    /// `⟨v, x⟩ = Σ w_i v_i x_i`.
    pub fn pairing(&self, v: &[f64], x: &[f64]) -> f64 {
        v.iter().zip(x).zip(&self.weights).map(|((a, b), w)| w * a * b).sum()
    }

    /// `j(g)_i = ‖g‖^(2-p) |g_i|^(p-1) sign(g_i)`, the derivative of `½‖·‖²`.
    pub fn duality_map(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.check_len(g)?;
        ensure_finite(g, "duality map argument")?;
        let n = self.norm(g);
        if n == 0.0 {
            return Ok(vec![0.0; g.len()]);
        }
        Ok(g.iter().map(|&x| n * (x.abs() / n).powf(self.p - 1.0) * x.signum()).collect())
    }

    /// `j^{-1}`, which is the duality map of the dual space.
    pub fn inverse_duality_map(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.dual().duality_map(v)
    }

    /// Gradient of `‖·‖^s / s`, namely `‖x‖^(s-2) j(x)`.
    pub fn norm_power_gradient(&self, x: &[f64], s: f64) -> Result<Vec<f64>> {
        let n = self.norm(x);
        if n == 0.0 {
            return Ok(vec![0.0; x.len()]);
        }
        let scale = n.powf(s - 2.0);
        Ok(self.duality_map(x)?.into_iter().map(|v| scale * v).collect())
    }
}

/// `p / (p - 1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `V(p, g) = (1/σ')‖p‖^σ' − ⟨p, g⟩ + (1/σ)‖g‖^σ`, with `p` in `dual` and `g` in its predual.
pub fn v_functional(dual: &PNormSpace, p: &[f64], g: &[f64], sigma: f64) -> Result<f64> {
    if !(sigma > 1.0) {
        return Err(Error::InvalidArgument(format!("sigma must exceed 1, got {sigma}")));
    }
    dual.check_len(p)?;
    dual.check_len(g)?;
    ensure_finite(p, "dual argument of V")?;
    ensure_finite(g, "primal argument of V")?;
    let sp = conjugate(sigma);
    let primal = dual.dual();
    Ok(dual.norm(p).powf(sp) / sp - dual.pairing(p, g) + primal.norm(g).powf(sigma) / sigma)
}
