use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{fmt_f, Config, RunOutput, Table};
use crate::banach::{
    estimate_norm_power_modulus, generalized_projection, rho_stability, BoxSet, ConvexityModulus, PNormSpace,
    ProjectionOptions,
};
use crate::curvature::{geometric_lambdas, lambda_sweep_grid, GridSweepOptions};
use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid, IndicatorSet, ScalarField};
use crate::oracles::{
    annulus_curvature, fit_decay_exponent, radon_counterexample_margin, RadonMargin, RieszQuadrature,
};

#[derive(Debug, Clone)]
pub struct RadonReport {
    pub rows: Vec<RadonMargin>,
    /// Relative change of the lower bound when both quadrature resolutions are doubled.
    pub refinement: Vec<f64>,
    pub exponent: f64,
    pub prefactor: f64,
}

pub fn radon_bounds(cfg: &Config) -> Result<RadonReport> {
    let ns = cfg.list("ns", &[4.0, 8.0, 16.0, 32.0])?;
    let delta = cfg.positive("delta", 0.25)?;
    let ell = cfg.positive("ell", 1.0)?;
    let samples = cfg.usize("samples", 16)?;
    let quad = RieszQuadrature { n_r: cfg.usize("n_r", 200)?, n_theta: cfg.usize("n_theta", 400)? };
    let fine = RieszQuadrature { n_r: 2 * quad.n_r, n_theta: 2 * quad.n_theta };
    if ns.len() < 2 {
        return Err(Error::InvalidArgument("need at least two values of n".into()));
    }
    let mut rows = Vec::with_capacity(ns.len());
    let mut refinement = Vec::with_capacity(ns.len());
    for &n in &ns {
        let coarse = radon_counterexample_margin(n, delta, ell, samples, quad)?;
        let refined = radon_counterexample_margin(n, delta, ell, samples, fine)?;
        refinement.push((refined.riesz_lower - coarse.riesz_lower).abs() / refined.riesz_lower.abs());
        rows.push(refined);
    }
    let lows: Vec<f64> = rows.iter().map(|r| r.riesz_lower).collect();
    let (exponent, prefactor) = fit_decay_exponent(&ns, &lows)?;
    Ok(RadonReport { rows, refinement, exponent, prefactor })
}

pub fn run_radon_bounds(cfg: &Config) -> Result<RunOutput> {
    let rep = radon_bounds(cfg)?;
    let mut table = Table::new(&[
        "n",
        "alpha",
        "riesz_lower",
        "argmin_radius",
        "kappa_annulus",
        "kappa_exact",
        "margin",
        "error_estimate",
        "refinement",
    ]);
    let mut out = RunOutput::default();
    let mut ok = (rep.exponent + 0.5).abs() <= 0.1;
    for (r, rel) in rep.rows.iter().zip(&rep.refinement) {
        table.push(vec![
            fmt_f(r.n),
            fmt_f(r.alpha),
            fmt_f(r.riesz_lower),
            fmt_f(r.argmin_radius),
            fmt_f(r.kappa_annulus),
            fmt_f(2.0 / r.n),
            fmt_f(r.margin),
            fmt_f(r.error_estimate),
            fmt_f(*rel),
        ]);
        ok &= *rel < 0.01;
        if r.n >= 8.0 {
            ok &= r.margin > 0.0;
        }
    }
    out.notes.push(format!("fitted riesz_lower ≈ {:.6} n^{:.6}", rep.prefactor, rep.exponent));
    out.as_expected = ok;
    out.table = table;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionPair {
    /// `‖g1 − g2‖` in the primal norm.
    pub input: f64,
    /// `‖π(g1) − π(g2)‖` in the dual norm.
    pub output: f64,
    /// Nonexpansive case: `input`; stability case: `ρ(input / 2)`.
    pub bound: f64,
}

impl ProjectionPair {
    pub fn ratio(&self) -> f64 {
        if self.bound > 0.0 {
            self.output / self.bound
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProjectionReport {
    pub hilbert: Vec<ProjectionPair>,
    pub stability: Vec<ProjectionPair>,
    pub modulus: ConvexityModulus,
    pub stability_exponent: f64,
}

impl ProjectionReport {
    pub fn max_hilbert_ratio(&self) -> f64 {
        self.hilbert.iter().map(ProjectionPair::ratio).fold(0.0, f64::max)
    }

    /// `max(output − bound)` over the stability pairs.
    pub fn max_stability_excess(&self) -> f64 {
        self.stability.iter().map(|p| p.output - p.bound).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn random_box(rng: &mut ChaCha8Rng, dim: usize) -> Result<BoxSet> {
    let (mut lo, mut hi) = (Vec::with_capacity(dim), Vec::with_capacity(dim));
    for _ in 0..dim {
        let a: f64 = rng.random_range(-1.0..1.0);
        let b: f64 = rng.random_range(-1.0..1.0);
        lo.push(a.min(b));
        hi.push(a.max(b));
    }
    BoxSet::new(lo, hi)
}

fn random_vec(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| scale * rng.random_range(-1.0..1.0)).collect()
}

pub fn projection_demo(cfg: &Config, seed: u64) -> Result<ProjectionReport> {
    let dim = cfg.usize("dim", 6)?;
    let pairs = cfg.usize("pairs", 1000)?;
    let stability_pairs = cfg.usize("stability_pairs", 200)?;
    let p_dual = cfg.positive("p_dual", 3.0)?;
    let scale = cfg.positive("data_scale", 1.0)?;
    let modulus_samples = cfg.usize("modulus_samples", 400)?;
    if dim == 0 || p_dual <= 1.0 {
        return Err(Error::InvalidArgument("need dim >= 1 and p_dual > 1".into()));
    }
    let opts = ProjectionOptions { tol: 1e-10, seed, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let hs = PNormSpace::uniform(2.0, dim, 1.0)?;
    let mut hilbert = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let set = random_box(&mut rng, dim)?;
        let g1 = random_vec(&mut rng, dim, scale);
        let g2 = random_vec(&mut rng, dim, scale);
        let a = generalized_projection(&hs, &set, &g1, 2.0, opts)?;
        let b = generalized_projection(&hs, &set, &g2, 2.0, opts)?;
        let input = hs.distance(&g1, &g2);
        hilbert.push(ProjectionPair { input, output: hs.distance(&a.point, &b.point), bound: input });
    }

    // σ' = p' so that the projection functional is (1/p')‖·‖^{p'} on ℓ^{p'}.
    let dual = PNormSpace::uniform(p_dual, dim, 1.0)?;
    let primal = dual.dual();
    let sigma = primal.p();
    let t_max = 4.0 * scale * (dim as f64).powf(1.0 / p_dual);
    let ts: Vec<f64> = (1..=40).map(|k| t_max * k as f64 / 40.0).collect();
    let modulus = estimate_norm_power_modulus(&dual, p_dual, &ts, modulus_samples, seed ^ 0x5eed)?;
    let mut stability = Vec::with_capacity(stability_pairs);
    for _ in 0..stability_pairs {
        let set = random_box(&mut rng, dim)?;
        let g1 = random_vec(&mut rng, dim, scale);
        let g2 = random_vec(&mut rng, dim, scale);
        let a = generalized_projection(&dual, &set, &g1, sigma, opts)?;
        let b = generalized_projection(&dual, &set, &g2, sigma, opts)?;
        let input = primal.distance(&g1, &g2);
        let bound = match rho_stability(&modulus, 0.5 * input) {
            Ok(r) => r,
            Err(Error::OutOfRange { .. }) => modulus.t_max(),
            Err(e) => return Err(e),
        };
        stability.push(ProjectionPair { input, output: dual.distance(&a.point, &b.point), bound });
    }
    let stability_exponent = modulus.power_type();
    Ok(ProjectionReport { hilbert, stability, modulus, stability_exponent })
}

pub fn run_projection_demo(cfg: &Config, seed: u64) -> Result<RunOutput> {
    let rep = projection_demo(cfg, seed)?;
    let mut table = Table::new(&["case", "index", "input_distance", "output_distance", "bound", "ratio"]);
    for (case, list) in [("hilbert", &rep.hilbert), ("stability", &rep.stability)] {
        for (k, p) in list.iter().enumerate() {
            table.push(vec![
                case.to_string(),
                k.to_string(),
                fmt_f(p.input),
                fmt_f(p.output),
                fmt_f(p.bound),
                fmt_f(p.ratio()),
            ]);
        }
    }
    let ratio = rep.max_hilbert_ratio();
    let excess = rep.max_stability_excess();
    let mut out = RunOutput { table, ..Default::default() };
    out.notes.push(format!("max Hilbert expansion ratio {ratio:.15}"));
    out.notes.push(format!(
        "max stability excess {excess:.3e}, sampled modulus power type {:.4}, stable {}",
        rep.stability_exponent,
        rep.modulus.is_stable()
    ));
    out.as_expected = ratio <= 1.0 + 1e-9 && excess <= 1e-6;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub h: f64,
    pub r1: f64,
    pub r2: f64,
    pub oracle: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_mean: f64,
    pub assigned: usize,
    pub unassigned: usize,
    pub kappa: ScalarField,
}

impl CurvatureReport {
    pub fn relative_error(&self) -> f64 {
        (self.kappa_mean - self.oracle).abs() / self.oracle
    }
}

pub fn curvature_annulus(cfg: &Config) -> Result<CurvatureReport> {
    let h = cfg.positive("h", 1.0 / 16.0)?;
    let r1 = cfg.positive("r1", 0.5)?;
    let r2 = cfg.positive("r2", 1.5)?;
    let margin = cfg.positive("margin", 0.5)?;
    let count = cfg.usize("lambda_count", 200)?;
    let boundary: Boundary = cfg.choice("boundary", Boundary::Neumann)?;
    let oracle = annulus_curvature(r1, r2)?;
    let a = r2 + margin;
    let grid = Grid::covering(&[-a, -a], &[a, a], h)?;
    let set = IndicatorSet::from_fn(grid.clone(), |x| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        r >= r1 && r <= r2
    });
    let lambdas = geometric_lambdas(
        cfg.positive("lambda_min", 0.1 * oracle)?,
        cfg.positive("lambda_max", 10.0 * oracle)?,
        count,
    )?;
    let density = ScalarField::constant(grid, 1.0);
    let sweep = lambda_sweep_grid(&set, &density, &lambdas, GridSweepOptions { boundary, verify_nesting: false })?;
    let (kappa_min, kappa_max) = sweep.kappa_range().unwrap_or((f64::NAN, f64::NAN));
    let assigned = sweep.assigned.count();
    let kappa_mean =
        sweep.kappa.values().iter().zip(sweep.assigned.mask()).filter(|(_, m)| **m).map(|(k, _)| k).sum::<f64>()
            / assigned.max(1) as f64;
    Ok(CurvatureReport {
        h,
        r1,
        r2,
        oracle,
        kappa_min,
        kappa_max,
        kappa_mean,
        assigned,
        unassigned: sweep.unassigned.count(),
        kappa: sweep.kappa,
    })
}

pub fn run_curvature(cfg: &Config) -> Result<RunOutput> {
    let rep = curvature_annulus(cfg)?;
    let mut table = Table::new(&[
        "h",
        "r1",
        "r2",
        "width_cells",
        "kappa_oracle",
        "kappa_min",
        "kappa_max",
        "kappa_mean",
        "relative_error",
        "assigned",
        "unassigned",
    ]);
    table.push(vec![
        fmt_f(rep.h),
        fmt_f(rep.r1),
        fmt_f(rep.r2),
        fmt_f((rep.r2 - rep.r1) / rep.h),
        fmt_f(rep.oracle),
        fmt_f(rep.kappa_min),
        fmt_f(rep.kappa_max),
        fmt_f(rep.kappa_mean),
        fmt_f(rep.relative_error()),
        rep.assigned.to_string(),
        rep.unassigned.to_string(),
    ]);
    let mut out = RunOutput { table, ..Default::default() };
    out.as_expected = rep.relative_error() <= 0.1 && rep.unassigned == 0;
    out.fields.push(("kappa".into(), rep.kappa));
    Ok(out)
}
