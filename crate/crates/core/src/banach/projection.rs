use super::space::{conjugate, v_functional, PNormSpace};
use crate::error::{ensure_finite, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Closed convex set given through callbacks.
pub trait ConvexSet {
    fn dim(&self) -> usize;
    fn contains(&self, p: &[f64], tol: f64) -> bool;
    /// Euclidean projection onto the set.
    fn project(&self, p: &[f64]) -> Vec<f64>;
    /// Points of the set used to certify variational inequalities.
    fn sample_points(&self, count: usize, rng: &mut dyn rand::RngCore) -> Vec<Vec<f64>>;
}

/// `{p : lo_i ≤ p_i ≤ hi_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxSet {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidArgument("box bounds must be nonempty and of equal length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(Error::Infeasible("box has an empty side".into()));
        }
        Ok(Self { lo, hi })
    }

    /// `[-r, r]^n`.
    pub fn symmetric(n: usize, r: f64) -> Result<Self> {
        Self::new(vec![-r; n], vec![r; n])
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }
}

impl ConvexSet for BoxSet {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.dim()
            && p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (a, b))| *x >= a - tol && *x <= b + tol)
    }

    fn project(&self, p: &[f64]) -> Vec<f64> {
        p.iter().zip(self.lo.iter().zip(&self.hi)).map(|(x, (a, b))| x.clamp(*a, *b)).collect()
    }

    fn sample_points(&self, count: usize, rng: &mut dyn rand::RngCore) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(count);
        // All vertices when there are few, then uniform interior points.
        if n <= 10 {
            for mask in 0..(1usize << n) {
                out.push((0..n).map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] }).collect());
            }
        }
        while out.len() < count {
            out.push((0..n).map(|i| self.lo[i] + (self.hi[i] - self.lo[i]) * rng.random::<f64>()).collect());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// `min_q ⟨π − q, g − ∇φ(π)⟩` over the sampled `q ∈ K`; nonnegative at the exact minimizer.
    pub vi_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub vi_samples: usize,
    pub seed: u64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200_000, vi_samples: 100, seed: 0 }
    }
}

/// Generalized projection `π_K(g) = argmin_{p ∈ K} V(p, g)` with `p` in `dual`.
///
/// Accelerated projected gradient with backtracking and adaptive restart on the
/// smooth part `(1/σ')‖p‖^σ' − ⟨p, g⟩`, using the Euclidean projection of `K`.
/// The result is certified by the variational inequality against sampled points.
pub fn generalized_projection(
    dual: &PNormSpace,
    set: &dyn ConvexSet,
    g: &[f64],
    sigma: f64,
    opts: ProjectionOptions,
) -> Result<Projection> {
    if !(sigma > 1.0) {
        return Err(Error::InvalidArgument(format!("sigma must exceed 1, got {sigma}")));
    }
    if set.dim() != dual.dim() || g.len() != dual.dim() {
        return Err(Error::InvalidArgument("set, space and data dimensions differ".into()));
    }
    ensure_finite(g, "projection data")?;
    let sp = conjugate(sigma);
    let w = dual.weights();
    // Gradient with respect to the weighted inner product.
    let grad = |p: &[f64]| -> Result<Vec<f64>> {
        let d = dual.norm_power_gradient(p, sp)?;
        Ok(d.iter().zip(g).map(|(a, b)| a - b).collect())
    };
    let wdot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(w).map(|((x, y), z)| z * x * y).sum() };

    let start = set.project(g);
    if !set.contains(&start, 1e-9) {
        return Err(Error::Infeasible("projection callback returned a point outside the set".into()));
    }
    let mut x = start.clone();
    let mut y = start;
    let mut t: f64 = 1.0;
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut last_res = f64::INFINITY;
    while iterations < opts.max_iter {
        iterations += 1;
        let gy = grad(&y)?;
        // Backtracking on the local Lipschitz estimate, which stays meaningful
        // when objective differences fall below rounding.
        let (x_new, g_new) = loop {
            let trial: Vec<f64> = y.iter().zip(&gy).map(|(a, b)| a - step * b).collect();
            let cand = set.project(&trial);
            let gc = grad(&cand)?;
            let diff: Vec<f64> = cand.iter().zip(&y).map(|(a, b)| a - b).collect();
            let dg: Vec<f64> = gc.iter().zip(&gy).map(|(a, b)| a - b).collect();
            if step * wdot(&dg, &diff) <= wdot(&diff, &diff) || step < 1e-14 {
                break (cand, gc);
            }
            step *= 0.5;
        };
        let trial: Vec<f64> = x_new.iter().zip(&g_new).map(|(a, b)| a - b).collect();
        let gm: Vec<f64> = set.project(&trial).iter().zip(&x_new).map(|(a, b)| a - b).collect();
        let residual = wdot(&gm, &gm).sqrt();
        last_res = residual;
        let dx: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let restart = wdot(&gy, &dx) > 0.0;
        let t_new = if restart { 1.0 } else { 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt()) };
        let beta = if restart { 0.0 } else { (t - 1.0) / t_new };
        y = x_new.iter().zip(&dx).map(|(a, d)| a + beta * d).collect();
        x = x_new;
        t = t_new;
        step *= 1.25;
        if residual <= opts.tol * 1e-2 || dx.iter().all(|v| *v == 0.0) && residual <= opts.tol {
            converged = true;
            break;
        }
    }
    let gx = grad(&x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let neg: Vec<f64> = gx.iter().map(|v| -v).collect();
    let vi_residual = set
        .sample_points(opts.vi_samples, &mut rng)
        .iter()
        .map(|q| {
            let diff: Vec<f64> = x.iter().zip(q).map(|(a, b)| a - b).collect();
            dual.pairing(&diff, &neg)
        })
        .fold(f64::INFINITY, f64::min);
    if !converged && vi_residual < -opts.tol {
        return Err(Error::NoConvergence { iterations, residual: last_res });
    }
    let value = v_functional(dual, &x, g, sigma)?;
    Ok(Projection { point: x, value, iterations, vi_residual })
}
