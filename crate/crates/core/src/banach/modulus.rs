use super::space::PNormSpace;
use crate::error::{Error, Result};
use crate::grid::isoperimetric_constant;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Lower modulus of uniform convexity `δ` of a convex functional.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexityModulus {
    /// `δ(t) = c t^τ`, known in closed form.
    PowerLaw { c: f64, tau: f64 },
    /// Monotone sampled envelope on `ts` with a fitted power law used below `ts[0]`.
    Sampled(SampledModulus),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledModulus {
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    pub fit_c: f64,
    pub fit_tau: f64,
    /// False when half of the samples already disagreed with the full envelope by more than 5%.
    pub stable: bool,
}

impl ConvexityModulus {
    /// `δ(t) = t²/2`, the modulus of `½‖·‖²` in a Hilbert space.
    pub fn hilbert() -> Self {
        ConvexityModulus::PowerLaw { c: 0.5, tau: 2.0 }
    }

    pub fn power_law(c: f64, tau: f64) -> Result<Self> {
        if !(c > 0.0 && tau > 1.0 && c.is_finite() && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("power law needs c > 0 and tau > 1, got ({c}, {tau})")));
        }
        Ok(ConvexityModulus::PowerLaw { c, tau })
    }

    /// Exponent `τ`: exact for power laws, fitted for sampled envelopes.
    pub fn power_type(&self) -> f64 {
        match self {
            ConvexityModulus::PowerLaw { tau, .. } => *tau,
            ConvexityModulus::Sampled(s) => s.fit_tau,
        }
    }

    pub fn is_stable(&self) -> bool {
        match self {
            ConvexityModulus::PowerLaw { .. } => true,
            ConvexityModulus::Sampled(s) => s.stable,
        }
    }

    /// Largest argument the modulus can be evaluated at.
    pub fn t_max(&self) -> f64 {
        match self {
            ConvexityModulus::PowerLaw { .. } => f64::INFINITY,
            ConvexityModulus::Sampled(s) => *s.ts.last().unwrap(),
        }
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("modulus argument must be nonnegative, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        match self {
            ConvexityModulus::PowerLaw { c, tau } => Ok(c * t.powf(*tau)),
            ConvexityModulus::Sampled(s) => {
                let t0 = s.ts[0];
                if t < t0 {
                    return Ok(s.values[0] * (t / t0).powf(s.fit_tau));
                }
                let hi = *s.ts.last().unwrap();
                if t > hi {
                    return Err(Error::OutOfRange { value: t, lo: 0.0, hi });
                }
                Ok(interpolate(&s.ts, &s.values, t))
            }
        }
    }

    /// Nondecreasing lower bound of `δ(t) / t`.
    fn ratio(&self, t: f64) -> f64 {
        match self {
            ConvexityModulus::PowerLaw { c, tau } => c * t.powf(tau - 1.0),
            ConvexityModulus::Sampled(s) => {
                let ratios = rectified_ratios(s);
                let t0 = s.ts[0];
                if t < t0 {
                    ratios[0] * (t / t0).powf(s.fit_tau - 1.0)
                } else {
                    interpolate(&s.ts, &ratios, t.min(*s.ts.last().unwrap()))
                }
            }
        }
    }
}

fn rectified_ratios(s: &SampledModulus) -> Vec<f64> {
    let mut r: Vec<f64> = s.ts.iter().zip(&s.values).map(|(t, v)| v / t).collect();
    for i in (0..r.len().saturating_sub(1)).rev() {
        r[i] = r[i].min(r[i + 1]);
    }
    r
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&v| v < x);
    if k == 0 {
        return ys[0];
    }
    if k == xs.len() {
        return *ys.last().unwrap();
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = (x - x0) / (x1 - x0);
    ys[k - 1] * (1.0 - w) + ys[k] * w
}

/// Sampled lower envelope of the midpoint convexity gap of `phi`.
///
/// For each `t` in `t_grid`, pairs `f, g` with `norm(f - g) = t` are drawn around
/// random midpoints; `δ̂(t) = min 4[½φ(f) + ½φ(g) − φ((f+g)/2)]` after a local
/// random-search refinement of the best pair. The table is then made
/// nondecreasing and a power law is fitted in log-log coordinates.
pub fn estimate_modulus(
    phi: &dyn Fn(&[f64]) -> f64,
    norm: &dyn Fn(&[f64]) -> f64,
    dim: usize,
    t_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ConvexityModulus> {
    if t_grid.len() < 2 || t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("t grid needs at least two positive entries".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("t grid must be increasing".into()));
    }
    if samples < 2 || dim == 0 {
        return Err(Error::InvalidArgument("need at least two samples and a positive dimension".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = |m: &[f64], e: &[f64], t: f64| {
        let f: Vec<f64> = m.iter().zip(e).map(|(a, b)| a + 0.5 * t * b).collect();
        let g: Vec<f64> = m.iter().zip(e).map(|(a, b)| a - 0.5 * t * b).collect();
        4.0 * (0.5 * phi(&f) + 0.5 * phi(&g) - phi(m))
    };
    let unit = |v: Vec<f64>| {
        let n = norm(&v);
        v.into_iter().map(|x| x / n).collect::<Vec<f64>>()
    };
    let mut full = Vec::with_capacity(t_grid.len());
    let mut half = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let mut best = (f64::INFINITY, vec![0.0; dim], vec![0.0; dim]);
        let mut best_half = f64::INFINITY;
        for k in 0..samples {
            let e = unit((0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
            let m: Vec<f64> = if k % 4 == 0 {
                vec![0.0; dim]
            } else {
                let dir = unit((0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
                let r = rng.random_range(0.0..1.5) * t;
                dir.into_iter().map(|x| r * x).collect()
            };
            let v = gap(&m, &e, t);
            if v < best.0 {
                best = (v, m, e);
            }
            if k < samples / 2 {
                best_half = best_half.min(v);
            }
        }
        let (mut val, mut m, mut e) = best;
        let mut step = 0.25;
        for _ in 0..8 {
            for _ in 0..25 {
                let m2: Vec<f64> = m.iter().map(|x| x + step * t * rng.sample::<f64, _>(StandardNormal)).collect();
                let e2 = unit(e.iter().map(|x| x + step * rng.sample::<f64, _>(StandardNormal)).collect());
                let v = gap(&m2, &e2, t);
                if v < val {
                    (val, m, e) = (v, m2, e2);
                }
            }
            step *= 0.5;
        }
        full.push(val.max(0.0));
        half.push(best_half.max(0.0));
    }
    let stable = full.iter().zip(&half).all(|(f, h)| (h - f).abs() <= 0.05 * f.abs().max(f64::MIN_POSITIVE));
    for i in (0..full.len() - 1).rev() {
        full[i] = full[i].min(full[i + 1]);
    }
    let (fit_c, fit_tau) = fit_power_law(t_grid, &full);
    Ok(ConvexityModulus::Sampled(SampledModulus { ts: t_grid.to_vec(), values: full, fit_c, fit_tau, stable }))
}

/// Sampled modulus of `‖·‖^s / s` on a weighted `ℓ^p` space.
pub fn estimate_norm_power_modulus(
    space: &PNormSpace,
    s: f64,
    t_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ConvexityModulus> {
    if !(s > 1.0) {
        return Err(Error::InvalidArgument(format!("norm power must exceed 1, got {s}")));
    }
    let phi = |x: &[f64]| space.norm(x).powf(s) / s;
    let norm = |x: &[f64]| space.norm(x);
    estimate_modulus(&phi, &norm, space.dim(), t_grid, samples, seed)
}

/// Least-squares fit of `log y = log c + τ log t` over entries with `y > 0`.
fn fit_power_law(ts: &[f64], ys: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = ts.iter().zip(ys).filter(|(_, y)| **y > 0.0).map(|(t, y)| (t.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return (0.0, f64::NAN);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let tau = sxy / sxx;
    ((my - tau * mx).exp(), tau)
}

/// `⟨v_f − v_g, f − g⟩ − 2δ(‖f − g‖)` for `φ = ‖·‖^s / s` on `space`.
pub fn monotonicity_gap(space: &PNormSpace, s: f64, f: &[f64], g: &[f64], delta: &ConvexityModulus) -> Result<f64> {
    let vf = space.norm_power_gradient(f, s)?;
    let vg = space.norm_power_gradient(g, s)?;
    let dv: Vec<f64> = vf.iter().zip(&vg).map(|(a, b)| a - b).collect();
    let dx: Vec<f64> = f.iter().zip(g).map(|(a, b)| a - b).collect();
    Ok(space.pairing(&dv, &dx) - 2.0 * delta.evaluate(space.norm(&dx))?)
}

/// `ρ(s)`: the `t` solving `δ(t)/t = s`.
///
/// Closed form for power laws, bisection on the rectified ratio otherwise.
pub fn rho_stability(delta: &ConvexityModulus, s: f64) -> Result<f64> {
    match delta {
        ConvexityModulus::PowerLaw { c, tau } => {
            if !(s >= 0.0) {
                return Err(Error::InvalidArgument(format!("stability argument must be nonnegative, got {s}")));
            }
            Ok((s / c).powf(1.0 / (tau - 1.0)))
        }
        ConvexityModulus::Sampled(_) => rho_by_bisection(delta, s),
    }
}

/// Bisection for `δ(t)/t = s` to absolute accuracy `1e-10`, valid for any modulus.
pub fn rho_by_bisection(delta: &ConvexityModulus, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidArgument(format!("stability argument must be nonnegative, got {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let mut hi = match delta {
        ConvexityModulus::PowerLaw { .. } => {
            let mut hi = 1.0;
            while delta.ratio(hi) < s {
                hi *= 2.0;
            }
            hi
        }
        ConvexityModulus::Sampled(_) => {
            let hi = delta.t_max();
            let top = delta.ratio(hi);
            if top < s {
                return Err(Error::OutOfRange { value: s, lo: 0.0, hi: top });
            }
            hi
        }
    };
    let mut lo = 0.0;
    while hi - lo > 1e-10 * (1.0 + hi) {
        let mid = 0.5 * (lo + hi);
        if delta.ratio(mid) < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterVerdict {
    pub ok: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
}

/// Checks `‖w‖ / α^(1/(σ−1)) ≤ 2 (‖A*‖/η) δ(η/‖A*‖)` with `η < Θ_d`.
///
/// A relative slack of `1e-12` absorbs rounding at the boundary case.
pub fn parameter_choice_check(
    w_norm: f64,
    alpha: f64,
    sigma: f64,
    opnorm: f64,
    eta: f64,
    d: usize,
    delta: &ConvexityModulus,
) -> Result<ParameterVerdict> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    if !(sigma > 1.0) {
        return Err(Error::InvalidArgument(format!("sigma must exceed 1, got {sigma}")));
    }
    if !(opnorm > 0.0) || !(w_norm >= 0.0) {
        return Err(Error::InvalidArgument("operator norm must be positive and ‖w‖ nonnegative".into()));
    }
    let theta = isoperimetric_constant(d)?;
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
    }
    if eta >= theta {
        return Err(Error::InvalidArgument(format!("eta must be below the isoperimetric constant ({eta} >= {theta})")));
    }
    let lhs = w_norm / alpha.powf(1.0 / (sigma - 1.0));
    let rhs = 2.0 * (opnorm / eta) * delta.evaluate(eta / opnorm)?;
    let margin = rhs - lhs;
    Ok(ParameterVerdict { ok: margin >= -1e-12 * (1.0 + rhs), lhs, rhs, margin })
}
