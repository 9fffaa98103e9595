use rayon::prelude::*;

use super::{fmt_f, fmt_opt, Config, RunOutput, Table};
use crate::banach::{parameter_choice_check, ConvexityModulus, ParameterVerdict};
use crate::error::Result;
use crate::grid::{
    ball_indicator, hausdorff_distance, isoperimetric_constant, level_set, Anisotropy, Boundary, Grid, IndicatorSet,
    PerimeterMode, ScalarField,
};
use crate::oracles::{rof_two_balls_solution, HeightConvention, SeparationBound, TwoBallConfig};
use crate::solver::{solve_multilevel, ProblemSpec, SolveOptions};

/// Analytic quantities of the two-ball schedule at index `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleRow {
    pub n: usize,
    pub alpha: f64,
    pub c: f64,
    pub r: f64,
    /// `√(4π/3) c r^{3/2}`.
    pub w_norm: f64,
    /// Heights from the first-order condition.
    pub b: f64,
    pub s: f64,
    /// Heights with the halved shrinkage `(1 − (3/2)α)^+`.
    pub b_printed: f64,
    pub s_printed: f64,
}

/// `α_n = alpha_scale / n`, `r_n = f(1/n)²`, `c_n = 1/(n f(1/n)²) + 1` with `f(t) = coef t^a`.
pub fn counterexample_schedule(n: usize, p: &CounterexampleParams) -> Result<ScheduleRow> {
    let t = 1.0 / n as f64;
    let ft = p.f_coef * t.powf(p.f_exponent);
    let r = ft * ft;
    let c = 1.0 / (n as f64 * r) + 1.0;
    let alpha = p.alpha_scale / n as f64;
    let cfg = TwoBallConfig { r1: p.r1, r2: r, separation: p.x0, c1: 1.0, c2: c, alpha, bound: p.separation_bound };
    let (b, s) = rof_two_balls_solution(&cfg, HeightConvention::FirstOrder)?;
    let (b_printed, s_printed) = rof_two_balls_solution(&cfg, HeightConvention::AsPrinted)?;
    let w_norm = (4.0 * std::f64::consts::PI / 3.0).sqrt() * c * r.powf(1.5);
    Ok(ScheduleRow { n, alpha, c, r, w_norm, b, s, b_printed, s_printed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleParams {
    pub h: f64,
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
    pub n_min: usize,
    pub n_max: usize,
    pub alpha_scale: f64,
    pub f_coef: f64,
    pub f_exponent: f64,
    pub r1: f64,
    /// Center of the second ball on the first axis.
    pub x0: f64,
    pub separation_bound: SeparationBound,
    /// Numeric rows need `r_n ≥ min_radius_cells · h`.
    pub min_radius_cells: f64,
    /// Solve rows below the resolution guard anyway.
    pub force_numeric: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub levels: usize,
    pub mode: PerimeterMode,
    pub eta: f64,
    pub threshold: f64,
    pub keep_fields: bool,
}

impl Default for CounterexampleParams {
    fn default() -> Self {
        Self {
            h: 1.0 / 24.0,
            box_lo: vec![-2.5, -2.5, -2.5],
            box_hi: vec![5.5, 2.5, 2.5],
            n_min: 1,
            n_max: 3,
            alpha_scale: 1.0 / 3.0,
            f_coef: 1.0,
            f_exponent: 1.0,
            r1: 1.0,
            x0: 3.0,
            separation_bound: SeparationBound::Ros,
            min_radius_cells: 4.0,
            force_numeric: false,
            tol: 1e-3,
            max_iter: 20_000,
            levels: 2,
            mode: PerimeterMode::isotropic(Boundary::Dirichlet),
            eta: 0.99 * isoperimetric_constant(3).expect("d = 3 is valid"),
            threshold: 0.5,
            keep_fields: true,
        }
    }
}

impl CounterexampleParams {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let d = Self::default();
        let p = Self {
            h: cfg.positive("h", d.h)?,
            box_lo: cfg.list("box_lo", &d.box_lo)?,
            box_hi: cfg.list("box_hi", &d.box_hi)?,
            n_min: cfg.usize("n_min", d.n_min)?.max(1),
            n_max: cfg.usize("n_max", d.n_max)?,
            alpha_scale: cfg.positive("alpha_scale", d.alpha_scale)?,
            f_coef: cfg.positive("f_coef", d.f_coef)?,
            f_exponent: cfg.f64("f_exponent", d.f_exponent)?,
            r1: cfg.positive("r1", d.r1)?,
            x0: cfg.positive("x0", d.x0)?,
            separation_bound: cfg.choice("separation_bound", d.separation_bound)?,
            min_radius_cells: cfg.positive("min_radius_cells", d.min_radius_cells)?,
            force_numeric: cfg.usize("force_numeric", 0)? != 0,
            tol: cfg.positive("tol", d.tol)?,
            max_iter: cfg.usize("max_iter", d.max_iter)?,
            levels: cfg.usize("levels", d.levels)?,
            mode: PerimeterMode::new(
                cfg.choice("tv_mode", Anisotropy::Isotropic)?,
                cfg.choice("boundary", Boundary::Dirichlet)?,
            ),
            eta: cfg.positive("eta", d.eta)?,
            threshold: cfg.f64("threshold", d.threshold)?,
            keep_fields: cfg.usize("dump_fields", 1)? != 0,
        };
        if p.f_exponent < 1.0 {
            return Err(crate::Error::InvalidArgument("f_exponent must be at least 1".into()));
        }
        if p.n_max < p.n_min || p.box_lo.len() != 3 || p.box_hi.len() != 3 {
            return Err(crate::Error::InvalidArgument("need n_min <= n_max and a three-dimensional box".into()));
        }
        Ok(p)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::covering(&self.box_lo, &self.box_hi, self.h)
    }
}

#[derive(Debug, Clone)]
pub struct CounterexampleRow {
    pub schedule: ScheduleRow,
    pub numeric: bool,
    pub w_norm_grid: f64,
    pub b_numeric: Option<f64>,
    pub s_numeric: Option<f64>,
    /// `d_H({u_n > s}, {u† > s})` with `u† = 1_{B(0,r1)}`.
    pub hausdorff: Option<f64>,
    pub verdict: ParameterVerdict,
    pub label: &'static str,
    pub gap: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub u: Option<ScalarField>,
}

fn max_over(u: &ScalarField, set: &IndicatorSet) -> f64 {
    set.mask().iter().zip(u.values()).filter(|(m, _)| **m).map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max)
}

/// Analytic rows for every `n` and solver rows where the second ball is resolved.
pub fn counterexample_rows(p: &CounterexampleParams) -> Result<Vec<CounterexampleRow>> {
    let grid = p.grid()?;
    let b1 = ball_indicator(&grid, &[0.0, 0.0, 0.0], p.r1)?;
    let f = ScalarField::from_indicator(&b1, 1.0);
    let dagger = level_set(&f, p.threshold);
    let rows: Vec<ScheduleRow> = (p.n_min..=p.n_max).map(|n| counterexample_schedule(n, p)).collect::<Result<_>>()?;
    rows.into_par_iter()
        .map(|sr| -> Result<CounterexampleRow> {
            let b2 = ball_indicator(&grid, &[p.x0, 0.0, 0.0], sr.r)?;
            let w = ScalarField::from_indicator(&b2, sr.c);
            let w_norm_grid = (grid.cell_volume() * w.values().iter().map(|x| x * x).sum::<f64>()).sqrt();
            let verdict =
                parameter_choice_check(sr.w_norm, sr.alpha, 2.0, 1.0, p.eta, 3, &ConvexityModulus::hilbert())?;
            let numeric = p.force_numeric || sr.r >= p.min_radius_cells * p.h;
            let mut row = CounterexampleRow {
                schedule: sr,
                numeric,
                w_norm_grid,
                b_numeric: None,
                s_numeric: None,
                hausdorff: None,
                verdict,
                label: "",
                gap: None,
                iterations: None,
                converged: None,
                u: None,
            };
            if numeric {
                let spec = ProblemSpec::denoising(&f, Some(w.values()), sr.alpha, p.mode)?;
                let opts = SolveOptions { tol: p.tol, max_iter: p.max_iter, ..Default::default() };
                let sol = solve_multilevel(&spec, opts, p.levels)?;
                row.b_numeric = Some(max_over(&sol.u, &b1));
                row.s_numeric = Some(max_over(&sol.u, &b2));
                row.hausdorff = Some(hausdorff_distance(&level_set(&sol.u, p.threshold), &dagger)?);
                row.gap = Some(sol.relative_gap());
                row.iterations = Some(sol.iterations);
                row.converged = Some(sol.converged);
                if p.keep_fields {
                    row.u = Some(sol.u);
                }
            }
            let s = row.s_numeric.unwrap_or(sr.s);
            row.label = if !verdict.ok {
                "rule-violated"
            } else if s >= p.threshold {
                "non-convergent"
            } else {
                "convergent"
            };
            Ok(row)
        })
        .collect()
}

pub fn run_counterexample3d(cfg: &Config) -> Result<RunOutput> {
    let p = CounterexampleParams::from_config(cfg)?;
    let rows = counterexample_rows(&p)?;
    let mut table = Table::new(&[
        "n",
        "alpha",
        "c",
        "r",
        "w_norm",
        "w_norm_grid",
        "b_analytic",
        "s_analytic",
        "b_printed",
        "s_printed",
        "b_numeric",
        "s_numeric",
        "d_h",
        "rule_lhs",
        "rule_rhs",
        "rule_ok",
        "numeric",
        "gap",
        "verdict",
    ]);
    let mut out = RunOutput { as_expected: true, ..Default::default() };
    for row in rows {
        let s = &row.schedule;
        table.push(vec![
            s.n.to_string(),
            fmt_f(s.alpha),
            fmt_f(s.c),
            fmt_f(s.r),
            fmt_f(s.w_norm),
            fmt_f(row.w_norm_grid),
            fmt_f(s.b),
            fmt_f(s.s),
            fmt_f(s.b_printed),
            fmt_f(s.s_printed),
            fmt_opt(row.b_numeric),
            fmt_opt(row.s_numeric),
            fmt_opt(row.hausdorff),
            fmt_f(row.verdict.lhs),
            fmt_f(row.verdict.rhs),
            row.verdict.ok.to_string(),
            row.numeric.to_string(),
            fmt_opt(row.gap),
            row.label.to_string(),
        ]);
        out.as_expected &= row.label == "non-convergent";
        if let (Some(bn), Some(sn)) = (row.b_numeric, row.s_numeric) {
            let fo = (bn - s.b).abs().max((sn - s.s).abs());
            let pr = (bn - s.b_printed).abs().max((sn - s.s_printed).abs());
            out.notes.push(format!(
                "n = {}: numeric heights ({bn:.4}, {sn:.4}) deviate by {fo:.4} from the first-order heights and {pr:.4} from the halved-shrinkage heights",
                s.n
            ));
        }
        if let Some(u) = row.u {
            out.fields.push((format!("u_n{}", s.n), u));
        }
    }
    out.table = table;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_matches_closed_forms() {
        let p = CounterexampleParams::default();
        for n in 1..=6 {
            let row = counterexample_schedule(n, &p).unwrap();
            let nf = n as f64;
            assert!((row.c - (nf + 1.0)).abs() < 1e-12);
            assert!((row.s - 1.0).abs() < 1e-12);
            assert!((row.b - (1.0 - 1.0 / nf)).abs() < 1e-12);
            assert!((row.b_printed - (1.0 - 0.5 / nf)).abs() < 1e-12);
            let expect = (4.0 * std::f64::consts::PI / 3.0).sqrt() * (nf + 1.0) / (nf * nf * nf);
            assert!((row.w_norm - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn norm_decays_like_inverse_root_for_unit_heights() {
        // c_n = n, r_n = 1/n gives √(4π/3)/√n.
        let k = (4.0 * std::f64::consts::PI / 3.0).sqrt();
        for n in [1.0f64, 4.0, 9.0] {
            let w = k * n * (1.0 / n).powf(1.5);
            assert!((w - k / n.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn nitsche_bound_rejects_the_default_geometry() {
        let p = CounterexampleParams { separation_bound: SeparationBound::Nitsche, ..Default::default() };
        assert!(matches!(counterexample_schedule(1, &p), Err(crate::Error::NotFarApart { .. })));
        assert!(counterexample_schedule(1, &CounterexampleParams::default()).is_ok());
    }

    #[test]
    fn coarse_run_flags_unresolved_rows() {
        let p = CounterexampleParams {
            h: 1.0 / 4.0,
            n_max: 2,
            tol: 1e-3,
            levels: 0,
            keep_fields: false,
            ..Default::default()
        };
        let rows = counterexample_rows(&p).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].numeric && !rows[1].numeric);
        assert!(rows[1].b_numeric.is_none());
        assert!(!rows[0].verdict.ok);
        assert_eq!(rows[0].label, "rule-violated");
        assert!((rows[0].w_norm_grid - rows[0].schedule.w_norm).abs() < 0.3 * rows[0].schedule.w_norm);
    }
}
