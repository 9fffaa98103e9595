use std::io::Write;

use super::gradient::{EdgeField, Gradient};
use super::operator::LinearMap;
use super::problem::ProblemSpec;
use crate::error::{Error, Result};
use crate::grid::{PerimeterMode, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Iterations between duality-gap evaluations.
    pub check_every: usize,
    pub record_history: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 50_000, check_every: 20, record_history: false }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRecord {
    pub iteration: usize,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

/// Writes `iter,primal,dual,gap` rows.
pub fn write_history_csv<W: Write>(history: &[GapRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "primal", "dual", "gap"])?;
    for r in history {
        w.write_record(&[r.iteration.to_string(), r.primal.to_string(), r.dual.to_string(), r.gap.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: ScalarField,
    /// TV dual field with `‖z‖_∞ ≤ 1`.
    pub z: EdgeField,
    /// Data-space dual variable.
    pub p: Vec<f64>,
    /// `A* p`.
    pub v: ScalarField,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative mismatch between `A* p` and `Dᵀ z`; zero by construction for the identity.
    pub dual_feasibility: f64,
    pub history: Vec<GapRecord>,
}

impl Solution {
    /// Gap relative to `1 + |primal|`.
    pub fn relative_gap(&self) -> f64 {
        self.gap / (1.0 + self.primal_value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualValue {
    pub value: f64,
    pub feasible: bool,
    /// `max(0, ‖z‖_∞ − 1)` plus the relative defect of `A* p = Dᵀ z`.
    pub infeasibility: f64,
}

/// `α⟨p, f + w⟩ − (α^σ'/σ')‖p‖^σ'_{Y*}`, the dual objective on the scale of the primal.
///
/// Feasibility `A* p ∈ ∂TV(0)` is judged through the representing edge field `z`.
pub fn dual_objective(spec: &ProblemSpec, p: &[f64], z: Option<&EdgeField>) -> Result<DualValue> {
    if p.len() != spec.operator().data_len() {
        return Err(Error::InvalidArgument("dual variable has the wrong length".into()));
    }
    let value = dual_value(spec, p);
    let v = spec.operator().adjoint_raw(p);
    let infeasibility = match z {
        Some(z) => {
            spec.grid().check_same(z.grid())?;
            let div = z.divergence();
            let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
            let defect = v.iter().zip(div.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
            (z.dual_norm() - 1.0).max(0.0) + if v.iter().all(|x| *x == 0.0) { 0.0 } else { defect }
        }
        None if v.iter().all(|x| *x == 0.0) => 0.0,
        None => return Err(Error::MissingDualField),
    };
    Ok(DualValue { value, feasible: infeasibility <= 1e-9, infeasibility })
}

fn dual_value(spec: &ProblemSpec, p: &[f64]) -> f64 {
    let alpha = spec.alpha();
    let sp = spec.sigma() / (spec.sigma() - 1.0);
    let g = spec.data();
    alpha * spec.operator().data_pairing(p, &g) - alpha.powf(sp) / sp * spec.dual_data_norm(p).powf(sp)
}

/// `(|h^d Σ u v − TV(u)|, feasibility)` where feasibility rescales `z` to
/// represent `v` as well as possible, `v ≈ t Dᵀ z`, and reports
/// `max(0, t‖z‖_∞ − 1)` plus the relative residual of that fit.
pub fn subgradient_residual(
    u: &ScalarField,
    v: &ScalarField,
    z: Option<&EdgeField>,
    mode: PerimeterMode,
) -> Result<(f64, f64)> {
    u.grid().check_same(v.grid())?;
    let pairing = u.inner(v)?;
    let tv = crate::grid::total_variation(u, mode);
    let pairing_gap = (pairing - tv).abs();
    if v.values().iter().all(|x| *x == 0.0) {
        return Ok((pairing_gap, 0.0));
    }
    let z = z.ok_or(Error::MissingDualField)?;
    u.grid().check_same(z.grid())?;
    if z.mode() != mode {
        return Err(Error::InvalidArgument("edge field was built for another perimeter mode".into()));
    }
    let div = z.divergence();
    let (dv, dd) = v.values().iter().zip(div.values()).fold((0.0, 0.0), |(a, b), (x, y)| (a + x * y, b + y * y));
    if dd == 0.0 {
        return Ok((pairing_gap, f64::INFINITY));
    }
    let t = dv / dd;
    let vn = v.values().iter().map(|x| x * x).sum::<f64>().sqrt();
    let resid = v.values().iter().zip(div.values()).map(|(x, y)| (x - t * y).powi(2)).sum::<f64>().sqrt() / vn;
    Ok((pairing_gap, (t.abs() * z.dual_norm() - 1.0).max(0.0) + resid))
}

/// Primal-dual hybrid gradient iteration, accelerated when the fidelity is quadratic.
pub fn solve(spec: &ProblemSpec, opts: SolveOptions) -> Result<Solution> {
    solve_from(spec, opts, None)
}

/// As [`solve`], starting from a previous solution on the same grid.
pub fn solve_from(spec: &ProblemSpec, opts: SolveOptions, start: Option<&Solution>) -> Result<Solution> {
    if !(opts.tol > 0.0) || opts.check_every == 0 {
        return Err(Error::InvalidArgument("tolerance and check interval must be positive".into()));
    }
    if let Some(s) = start {
        spec.grid().check_same(s.u.grid())?;
        if s.z.mode() != spec.mode() {
            return Err(Error::InvalidArgument("warm start uses another perimeter mode".into()));
        }
    }
    match spec.operator().linear_map() {
        None => solve_identity(spec, opts, start),
        Some(map) => solve_general(spec, map, opts, start),
    }
}

/// Proximal map of `τ |t|^σ/σ` at `c`.
fn prox_power(c: f64, tau: f64, sigma: f64) -> f64 {
    if sigma == 2.0 {
        return c / (1.0 + tau);
    }
    let a = c.abs();
    if a == 0.0 {
        return 0.0;
    }
    // Root of s^(σ−1) + (s − a)/τ on [0, a].
    let f = |s: f64| s.powf(sigma - 1.0) + (s - a) / tau;
    let (mut lo, mut hi) = (0.0, a);
    let mut s = a / (1.0 + tau * a.powf(sigma - 2.0)).max(1.0);
    for _ in 0..200 {
        let fs = f(s);
        if fs.abs() * tau <= 1e-15 * a {
            break;
        }
        if fs > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let df = (sigma - 1.0) * s.powf(sigma - 2.0) + 1.0 / tau;
        let next = s - fs / df;
        s = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    s.copysign(c)
}

struct GapState {
    primal: f64,
    dual: f64,
    p: Vec<f64>,
    /// Scale applied to `z` to obtain `p`.
    t: f64,
    /// Primal point recovered from `z` when it beats the iterate.
    recovered: Option<Vec<f64>>,
}

fn identity_gap(spec: &ProblemSpec, grad: &Gradient, u: &[f64], z: &[f64], g: &[f64]) -> GapState {
    let w = spec.grid().cell_volume();
    let alpha = spec.alpha();
    let sigma = spec.sigma();
    let sp = sigma / (sigma - 1.0);
    let objective = |u: &[f64]| {
        let fid = w * u.iter().zip(g).map(|(a, b)| (a - b).abs().powf(sigma)).sum::<f64>() / sigma;
        fid + alpha * grad.total_variation(u)
    };
    let mut primal = objective(u);
    let mut p = grad.divergence(z);
    // Optimality of u for fixed z: ψ'(u − g) = −α Dᵀz.
    let cand: Vec<f64> = p.iter().zip(g).map(|(pi, gi)| gi - (alpha * pi).abs().powf(sp - 1.0).copysign(*pi)).collect();
    let pc = objective(&cand);
    let recovered = if pc < primal {
        primal = pc;
        Some(cand)
    } else {
        None
    };
    // Best feasible multiple t p with t ∈ [0, 1].
    let pg: f64 = p.iter().zip(g).map(|(a, b)| a * b).sum();
    let pn: f64 = p.iter().map(|a| a.abs().powf(sp)).sum();
    let t = if pn > 0.0 && pg > 0.0 { (pg / (alpha.powf(sp - 1.0) * pn)).powf(1.0 / (sp - 1.0)).min(1.0) } else { 0.0 };
    if t != 1.0 {
        p.iter_mut().for_each(|x| *x *= t);
    }
    let dual = alpha * w * pg * t - alpha.powf(sp) / sp * w * pn * t.powf(sp);
    GapState { primal, dual, p, t, recovered }
}

fn solve_identity(spec: &ProblemSpec, opts: SolveOptions, start: Option<&Solution>) -> Result<Solution> {
    let grid = spec.grid().clone();
    let grad = Gradient::new(&grid, spec.mode());
    let g = spec.data();
    let n = grid.len();
    let alpha = spec.alpha();
    let sigma = spec.sigma();

    let mut u = start.map_or_else(|| g.clone(), |s| s.u.values().to_vec());
    let mut z = start.map_or_else(|| vec![0.0; grad.edge_len()], |s| s.z.values().to_vec());
    let mut u_bar = u.clone();
    let mut ext = vec![0.0; grad.ext_len()];
    let mut du = vec![0.0; grad.edge_len()];
    let mut div_ext = vec![0.0; grad.ext_len()];
    let mut div = vec![0.0; n];

    // Scaled problem Σ ψ(u − g) + α Σ φ(D u) with K = α D.
    let l = alpha * grad.norm_sq_bound().sqrt();
    let mut tau = 1.0 / l;
    let mut step = 0.95 / (tau * l * l);
    let accelerate = sigma == 2.0;

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut state;
    loop {
        if iterations % opts.check_every == 0 || iterations >= opts.max_iter {
            state = identity_gap(spec, &grad, &u, &z, &g);
            let gap = state.primal - state.dual;
            if opts.record_history {
                history.push(GapRecord { iteration: iterations, primal: state.primal, dual: state.dual, gap });
            }
            if gap <= opts.tol * (1.0 + state.primal.abs()) {
                converged = true;
                break;
            }
            if iterations >= opts.max_iter {
                break;
            }
        }
        iterations += 1;

        grad.lift(&u_bar, &mut ext);
        grad.apply(&ext, &mut du);
        let sa = step * alpha;
        for (zi, di) in z.iter_mut().zip(&du) {
            *zi += sa * di;
        }
        grad.project(&mut z);

        grad.transpose(&z, &mut div_ext);
        grad.restrict(&div_ext, &mut div);
        let ta = tau * alpha;
        for i in 0..n {
            let old = u[i];
            let c = old - ta * div[i] - g[i];
            let new = g[i] + prox_power(c, tau, sigma);
            u[i] = new;
            u_bar[i] = old;
        }
        let theta = if accelerate {
            let th = 1.0 / (1.0 + 2.0 * tau).sqrt();
            tau *= th;
            step /= th;
            th
        } else {
            1.0
        };
        for i in 0..n {
            u_bar[i] = u[i] + theta * (u[i] - u_bar[i]);
        }
    }

    let p = state.p;
    let v = ScalarField::new(grid.clone(), p.clone())?;
    if state.t != 1.0 {
        z.iter_mut().for_each(|x| *x *= state.t);
    }
    Ok(Solution {
        u: ScalarField::new(grid.clone(), state.recovered.unwrap_or(u))?,
        z: EdgeField::new(&grid, spec.mode(), z)?,
        p,
        v,
        primal_value: state.primal,
        dual_value: state.dual,
        gap: state.primal - state.dual,
        iterations,
        converged,
        dual_feasibility: 0.0,
        history,
    })
}

fn solve_general(
    spec: &ProblemSpec,
    map: &dyn LinearMap,
    opts: SolveOptions,
    start: Option<&Solution>,
) -> Result<Solution> {
    let grid = spec.grid().clone();
    let op = spec.operator();
    let grad = Gradient::new(&grid, spec.mode());
    let g = spec.data();
    let n = grid.len();
    let m = op.data_len();
    let w = grid.cell_volume();
    let alpha = spec.alpha();

    let mut u = start.map_or_else(|| vec![0.0; n], |s| s.u.values().to_vec());
    let mut z = start.map_or_else(|| vec![0.0; grad.edge_len()], |s| s.z.values().to_vec());
    let mut y = start.map_or_else(|| vec![0.0; m], |s| s.p.iter().map(|p| -alpha * p).collect());
    let mut u_bar = u.clone();
    let mut ext = vec![0.0; grad.ext_len()];
    let mut du = vec![0.0; grad.edge_len()];
    let mut au = vec![0.0; m];
    let mut div_ext = vec![0.0; grad.ext_len()];
    let mut div = vec![0.0; n];
    let mut mty = vec![0.0; n];

    // Unscaled ½‖M u − g‖² + α h^d Σ φ(D u) with dual blocks z and y.
    let kz = alpha * w;
    let lz = kz * grad.norm_sq_bound().sqrt();
    let ly = (op.opnorm_bound() * w.sqrt()).max(1e-300);
    let tau = 1.0 / (lz + ly);
    let sz = 0.475 / (tau * lz * lz);
    let sy = 0.475 / (tau * ly * ly);

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let finish = |u: &[f64], z: &[f64], y: &[f64]| -> (f64, f64, Vec<f64>, f64) {
        let primal = spec.fidelity(&op.apply_raw(u)) + alpha * grad.total_variation(u);
        let p: Vec<f64> = y.iter().map(|v| -v / alpha).collect();
        let dual = dual_value(spec, &p);
        let v = op.adjoint_raw(&p);
        let dz = grad.divergence(z);
        let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
        let feas = v.iter().zip(&dz).fold(0.0f64, |a, (x, d)| a.max((x - d).abs())) / scale;
        (primal, dual, p, feas)
    };
    let mut state;
    loop {
        if iterations % opts.check_every == 0 || iterations >= opts.max_iter {
            state = finish(&u, &z, &y);
            let gap = state.0 - state.1;
            if opts.record_history {
                history.push(GapRecord { iteration: iterations, primal: state.0, dual: state.1, gap });
            }
            let tol = opts.tol * (1.0 + state.0.abs());
            let trivial = state.2.iter().all(|p| *p == 0.0) && gap.abs() <= tol;
            if trivial || (gap.abs() <= tol && state.3 <= opts.tol.sqrt()) {
                converged = true;
                break;
            }
            if iterations >= opts.max_iter {
                break;
            }
        }
        iterations += 1;

        grad.lift(&u_bar, &mut ext);
        grad.apply(&ext, &mut du);
        for (zi, di) in z.iter_mut().zip(&du) {
            *zi += sz * kz * di;
        }
        grad.project(&mut z);
        map.apply(&u_bar, &mut au);
        for j in 0..m {
            y[j] = (y[j] + sy * (au[j] - g[j])) / (1.0 + sy);
        }

        grad.transpose(&z, &mut div_ext);
        grad.restrict(&div_ext, &mut div);
        map.transpose(&y, &mut mty);
        for i in 0..n {
            let old = u[i];
            u[i] = old - tau * (kz * div[i] + mty[i]);
            u_bar[i] = 2.0 * u[i] - old;
        }
    }

    let (primal, dual, p, feas) = state;
    let v = op.adjoint(&p)?;
    Ok(Solution {
        u: ScalarField::new(grid.clone(), u)?,
        z: EdgeField::new(&grid, spec.mode(), z)?,
        p,
        v,
        primal_value: primal,
        dual_value: dual,
        gap: primal - dual,
        iterations,
        converged,
        dual_feasibility: feas,
        history,
    })
}
