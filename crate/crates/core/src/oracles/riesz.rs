use super::annulus_curvature;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Piecewise-constant radial density: `values[i]` on `breaks[i] ≤ |y| < breaks[i+1]`, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialStep {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl RadialStep {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidArgument("need one more break than values".into()));
        }
        if !breaks.last().unwrap().is_finite() {
            return Err(Error::InvalidArgument("density support must be bounded".into()));
        }
        if breaks[0] < 0.0 || breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("breaks must be nonnegative and increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("radial density"));
        }
        Ok(Self { breaks, values })
    }

    /// `c` on the annulus `r1 ≤ |y| < r2`.
    pub fn annulus(r1: f64, r2: f64, c: f64) -> Result<Self> {
        Self::new(vec![r1, r2], vec![c])
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, r: f64) -> f64 {
        let k = self.breaks.partition_point(|&b| b <= r);
        if k == 0 || k == self.breaks.len() {
            0.0
        } else {
            self.values[k - 1]
        }
    }
}

/// Polar quadrature resolution: `n_r` radial cells over the support, `n_theta` angular cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RieszQuadrature {
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for RieszQuadrature {
    fn default() -> Self {
        Self { n_r: 400, n_theta: 800 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszValue {
    pub value: f64,
    /// Change against the half-resolution rule.
    pub error_estimate: f64,
}

fn riesz_polar(density: &RadialStep, x: [f64; 2], n_r: usize, n_theta: usize) -> f64 {
    let (b, v) = (&density.breaks, &density.values);
    let total = b[b.len() - 1] - b[0];
    let hr = total / n_r as f64;
    let eps = 0.5 * hr;
    let dth = 2.0 * PI / n_theta as f64;
    let (cos, sin): (Vec<f64>, Vec<f64>) =
        (0..n_theta).map(|k| ((k as f64 + 0.5) * dth).sin_cos()).map(|(s, c)| (c, s)).unzip();
    let mut sum = 0.0;
    for (i, &val) in v.iter().enumerate() {
        if val == 0.0 {
            continue;
        }
        let len = b[i + 1] - b[i];
        let m = ((len / hr).round() as usize).max(1);
        let dr = len / m as f64;
        for j in 0..m {
            let rho = b[i] + (j as f64 + 0.5) * dr;
            let mut ring = 0.0;
            for k in 0..n_theta {
                let dx = rho * cos[k] - x[0];
                let dy = rho * sin[k] - x[1];
                let dist = (dx * dx + dy * dy).sqrt();
                if dist >= eps {
                    ring += 1.0 / dist;
                }
            }
            sum += val * rho * dr * dth * ring;
        }
    }
    // ∫_{B(x,ε)} dy/|x−y| = 2π ε.
    sum + 2.0 * PI * eps * density.at(x[0].hypot(x[1]))
}

/// `I_1 u(x) = ∫ u(y)/|x − y| dy` in the plane for a radial step density, `|x| = x_radius`.
///
/// Midpoint rule on an origin-centered polar grid; cells closer to `x` than
/// `ε = h_r/2` are dropped and replaced by the exact integral of `1/|x−y|` over
/// `B(x, ε)` times the density at `x`.
pub fn riesz_potential_radial(density: &RadialStep, x_radius: f64, quad: RieszQuadrature) -> Result<RieszValue> {
    if !(x_radius >= 0.0 && x_radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("evaluation radius must be nonnegative, got {x_radius}")));
    }
    riesz_potential_at(density, [x_radius, 0.0], quad)
}

/// [`riesz_potential_radial`] at an arbitrary planar point.
pub fn riesz_potential_at(density: &RadialStep, x: [f64; 2], quad: RieszQuadrature) -> Result<RieszValue> {
    if !(x[0].is_finite() && x[1].is_finite()) {
        return Err(Error::NonFinite("evaluation point"));
    }
    if quad.n_r < 2 || quad.n_theta < 4 {
        return Err(Error::InvalidArgument("quadrature too coarse".into()));
    }
    let fine = riesz_polar(density, x, quad.n_r, quad.n_theta);
    let coarse = riesz_polar(density, x, quad.n_r / 2, quad.n_theta / 2);
    Ok(RieszValue { value: fine, error_estimate: (fine - coarse).abs() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadonMargin {
    pub n: f64,
    pub alpha: f64,
    /// `min_x (1/α_n) I_1 z_n(x)` over the sampled radii of `A_n`.
    pub riesz_lower: f64,
    pub argmin_radius: f64,
    pub kappa_annulus: f64,
    pub margin: f64,
    pub error_estimate: f64,
}

/// Quantities for `z_n = n^(−3/2−δ) 1_{A_n}`, `A_n = B(0,2n) ∖ B(0,n)`, `α_n = ℓ n^(−δ)`.
pub fn radon_counterexample_margin(
    n: f64,
    delta: f64,
    ell: f64,
    samples: usize,
    quad: RieszQuadrature,
) -> Result<RadonMargin> {
    if !(n >= 2.0 && n.is_finite()) {
        return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidArgument(format!("δ must lie in (0, 1/2), got {delta}")));
    }
    if !(ell > 0.0 && ell.is_finite()) || samples == 0 {
        return Err(Error::InvalidArgument("ℓ must be positive and samples nonzero".into()));
    }
    let height = n.powf(-1.5 - delta);
    let alpha = ell * n.powf(-delta);
    let z = RadialStep::annulus(n, 2.0 * n, height)?;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for j in 0..samples {
        let r = n + n * (j as f64 + 0.5) / samples as f64;
        let v = riesz_potential_radial(&z, r, quad)?;
        let scaled = v.value / alpha;
        if scaled < best.0 {
            best = (scaled, r, v.error_estimate / alpha);
        }
    }
    let kappa = annulus_curvature(n, 2.0 * n)?;
    Ok(RadonMargin {
        n,
        alpha,
        riesz_lower: best.0,
        argmin_radius: best.1,
        kappa_annulus: kappa,
        margin: best.0 - kappa,
        error_estimate: best.2,
    })
}

/// Least-squares slope and prefactor of `log y` against `log x`: `y ≈ c x^e`, returns `(e, c)`.
pub fn fit_decay_exponent(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("need at least two matching points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("log-log fit needs positive data".into()));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let e = sxy / sxx;
    Ok((e, (my - e * mx).exp()))
}
