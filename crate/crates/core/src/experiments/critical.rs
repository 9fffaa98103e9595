use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{fmt_f, Config, RunOutput, Table};
use crate::curvature::density_estimate_profile;
use crate::error::{Error, Result};
use crate::grid::{
    ball_indicator, isoperimetric_constant, level_set, Anisotropy, Boundary, Grid, PerimeterMode, ScalarField,
};
use crate::solver::{solve_sequence, ProblemSpec, ScheduleEntry, SequenceOptions, SequenceResult, SolveOptions};

/// Seeded cellwise uniform noise rescaled to `‖w‖_{L²} = norm`.
pub fn scaled_noise(grid: &Grid, norm: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let current = (grid.cell_volume() * w.iter().map(|x| x * x).sum::<f64>()).sqrt();
    let k = if current > 0.0 { norm / current } else { 0.0 };
    w.iter_mut().for_each(|x| *x *= k);
    w
}

/// Shared setup of the two-dimensional disc experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscParams {
    pub h: f64,
    pub half_width: f64,
    pub radius: f64,
    pub mode: PerimeterMode,
    pub tol: f64,
    pub max_iter: usize,
    pub levels: usize,
    pub eta: f64,
    pub support_level: f64,
}

impl DiscParams {
    fn from_config(cfg: &Config, h: f64, boundary: Boundary) -> Result<Self> {
        let theta = isoperimetric_constant(2)?;
        Ok(Self {
            h: cfg.positive("h", h)?,
            half_width: cfg.positive("half_width", 2.0)?,
            radius: cfg.positive("radius", 1.0)?,
            mode: PerimeterMode::new(cfg.choice("tv_mode", Anisotropy::Isotropic)?, cfg.choice("boundary", boundary)?),
            tol: cfg.positive("tol", 1e-6)?,
            max_iter: cfg.usize("max_iter", 50_000)?,
            levels: cfg.usize("levels", 2)?,
            eta: cfg.positive("eta", 0.99 * theta)?,
            support_level: cfg.positive("support_level", 0.1)?,
        })
    }

    fn setup(&self) -> Result<(ScalarField, ProblemSpec)> {
        let a = self.half_width;
        let grid = Grid::covering(&[-a, -a], &[a, a], self.h)?;
        let f = ScalarField::from_indicator(&ball_indicator(&grid, &[0.0, 0.0], self.radius)?, 1.0);
        let spec = ProblemSpec::denoising(&f, None, 1.0, self.mode)?;
        Ok((f, spec))
    }

    fn sequence_options(&self, f: &ScalarField, thresholds: Vec<f64>) -> SequenceOptions {
        SequenceOptions {
            solve: SolveOptions { tol: self.tol, max_iter: self.max_iter, ..Default::default() },
            levels: self.levels,
            thresholds,
            eta: Some(self.eta),
            u_dagger: Some(f.clone()),
            support_level: self.support_level,
            ..Default::default()
        }
    }
}

/// Smallest inner/outer density over the nonempty level sets of `u`.
fn density_floor(u: &ScalarField, thresholds: &[f64], r: f64) -> Result<f64> {
    let mut floor = f64::INFINITY;
    for &s in thresholds {
        let set = level_set(u, s);
        if set.boundary_cells().is_empty() {
            continue;
        }
        let row = density_estimate_profile(&set, &[r])?[0];
        floor = floor.min(row.inner.min(row.outer));
    }
    Ok(if floor.is_finite() { floor } else { f64::NAN })
}

#[derive(Debug, Clone)]
pub struct CriticalReport {
    pub h: f64,
    pub thresholds: Vec<f64>,
    pub ratio: f64,
    pub result: SequenceResult,
    /// Density lower bound at `r = density_cells · h` per row.
    pub density: Vec<f64>,
    /// Largest increase of `d_H` between consecutive rows, over all thresholds.
    pub max_increase: f64,
    pub final_hausdorff: f64,
}

impl CriticalReport {
    pub fn monotone(&self) -> bool {
        self.max_increase <= 2.0 * self.h
    }

    pub fn final_ok(&self) -> bool {
        self.final_hausdorff <= 3.0 * self.h
    }

    pub fn density_floor(&self) -> f64 {
        self.density.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `α_n = α_0 2^{−n}` with `‖w_n‖ = ratio · α_n` towards `u† = f`.
pub fn converge_critical(cfg: &Config, seed: u64) -> Result<CriticalReport> {
    let p = DiscParams::from_config(cfg, 1.0 / 32.0, Boundary::Neumann)?;
    let alpha0 = cfg.positive("alpha0", 0.2)?;
    let n_max = cfg.usize("n_max", 5)?;
    let ratio = cfg.f64("noise_ratio", 1.0)?;
    let thresholds = cfg.list("thresholds", &[0.25, 0.5, 0.75])?;
    let density_cells = cfg.positive("density_cells", 4.0)?;
    if n_max == 0 || ratio < 0.0 || thresholds.is_empty() {
        return Err(Error::InvalidArgument("need n_max >= 1, noise_ratio >= 0 and thresholds".into()));
    }
    let (f, spec) = p.setup()?;
    let grid = f.grid().clone();
    let schedule: Vec<ScheduleEntry> = (1..=n_max)
        .map(|n| {
            let alpha = alpha0 * 0.5f64.powi(n as i32);
            ScheduleEntry { alpha, w: scaled_noise(&grid, ratio * alpha, seed.wrapping_add(n as u64)) }
        })
        .collect();
    let result = solve_sequence(&spec, &schedule, &p.sequence_options(&f, thresholds.clone()))?;
    let density = result
        .rows
        .iter()
        .map(|row| density_floor(&row.u, &thresholds, density_cells * p.h))
        .collect::<Result<Vec<_>>>()?;
    let mut max_increase = f64::NEG_INFINITY;
    for pair in result.rows.windows(2) {
        for (a, b) in pair[0].hausdorff.iter().zip(&pair[1].hausdorff) {
            max_increase = max_increase.max(b - a);
        }
    }
    let final_hausdorff = result.rows.last().unwrap().hausdorff.iter().copied().fold(0.0, f64::max);
    Ok(CriticalReport { h: p.h, thresholds, ratio, result, density, max_increase, final_hausdorff })
}

pub fn run_converge_critical(cfg: &Config, seed: u64) -> Result<RunOutput> {
    let dump = cfg.usize("dump_fields", 1)? != 0;
    let rep = converge_critical(cfg, seed)?;
    let mut header: Vec<String> =
        ["n", "alpha", "w_norm", "noise_ratio", "l1_error"].iter().map(|s| s.to_string()).collect();
    header.extend(rep.thresholds.iter().map(|s| format!("d_h_{s}")));
    header
        .extend(["density", "support_radius", "gap", "rule_lhs", "rule_rhs", "verdict"].iter().map(|s| s.to_string()));
    let mut table = Table { header, rows: Vec::new() };
    let mut out = RunOutput::default();
    let mut all_ok = true;
    for (k, row) in rep.result.rows.iter().enumerate() {
        let mut cells = vec![
            (k + 1).to_string(),
            fmt_f(row.alpha),
            fmt_f(row.w_norm),
            fmt_f(row.w_norm / row.alpha),
            fmt_f(row.l1_error),
        ];
        cells.extend(row.hausdorff.iter().map(|d| fmt_f(*d)));
        cells.extend([
            fmt_f(rep.density[k]),
            fmt_f(row.support_radius),
            fmt_f(row.gap),
            fmt_f(row.verdict.lhs),
            fmt_f(row.verdict.rhs),
            (if row.verdict.ok { "rule-ok" } else { "rule-violated" }).to_string(),
        ]);
        table.push(cells);
        all_ok &= row.verdict.ok;
        if dump {
            out.fields.push((format!("u_n{}", k + 1), row.u.clone()));
        }
    }
    let all_violated = rep.result.rows.iter().all(|r| !r.verdict.ok);
    out.as_expected =
        if all_ok { rep.monotone() && rep.final_ok() && rep.density_floor() >= 0.05 } else { all_violated };
    out.notes.push(format!(
        "largest d_H increase {:.4e} (slack {:.4e}), final d_H {:.4e} (bound {:.4e}), density floor {:.4}",
        rep.max_increase,
        2.0 * rep.h,
        rep.final_hausdorff,
        3.0 * rep.h,
        rep.density_floor()
    ));
    out.table = table;
    Ok(out)
}

/// Fixed `α` with noise ratios `‖w‖/α` straddling `Θ_2`.
pub fn run_param_sweep(cfg: &Config, seed: u64) -> Result<RunOutput> {
    let p = DiscParams::from_config(cfg, 1.0 / 16.0, Boundary::Dirichlet)?;
    let alpha = cfg.positive("alpha", 0.1)?;
    let ratios = cfg.list("ratios", &[0.25, 0.5, 1.0, 2.0, 3.0, 3.5, 4.0, 6.0])?;
    if ratios.iter().any(|r| *r < 0.0) {
        return Err(Error::InvalidArgument("noise ratios must be nonnegative".into()));
    }
    let (f, spec) = p.setup()?;
    let grid = f.grid().clone();
    let schedule: Vec<ScheduleEntry> = ratios
        .iter()
        .enumerate()
        .map(|(k, r)| ScheduleEntry { alpha, w: scaled_noise(&grid, r * alpha, seed.wrapping_add(k as u64)) })
        .collect();
    let res = solve_sequence(&spec, &schedule, &p.sequence_options(&f, vec![0.5]))?;
    let mut table =
        Table::new(&["ratio", "alpha", "w_norm", "l1_error", "d_h", "gap", "rule_lhs", "rule_rhs", "verdict"]);
    let mut out = RunOutput { as_expected: true, ..Default::default() };
    for (r, row) in ratios.iter().zip(&res.rows) {
        table.push(vec![
            fmt_f(*r),
            fmt_f(alpha),
            fmt_f(row.w_norm),
            fmt_f(row.l1_error),
            fmt_f(row.hausdorff[0]),
            fmt_f(row.gap),
            fmt_f(row.verdict.lhs),
            fmt_f(row.verdict.rhs),
            (if row.verdict.ok { "rule-ok" } else { "rule-violated" }).to_string(),
        ]);
        out.as_expected &= row.verdict.ok == (*r <= p.eta * (1.0 + 1e-12));
    }
    out.notes.push(format!("eta = {:.6}, Θ_2 = {:.6}", p.eta, isoperimetric_constant(2)?));
    out.table = table;
    Ok(out)
}
