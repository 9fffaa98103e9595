use rayon::prelude::*;

use super::multilevel::solve_multilevel;
use super::pdhg::{Solution, SolveOptions};
use super::problem::{weighted_norm, ProblemSpec};
use crate::banach::{parameter_choice_check, ConvexityModulus, ParameterVerdict};
use crate::error::{Error, Result};
use crate::grid::{hausdorff_distance, isoperimetric_constant, level_set, ScalarField};

/// One `(α_n, w_n)` pair.
#[derive(Debug, Clone)]
pub struct ScheduleEntry {
    pub alpha: f64,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SequenceOptions {
    pub solve: SolveOptions,
    /// Coarse-to-fine levels passed to [`solve_multilevel`].
    pub levels: usize,
    pub thresholds: Vec<f64>,
    /// Parameter in the choice rule, must lie below `Θ_d`. Defaults to `0.99 Θ_d`.
    pub eta: Option<f64>,
    /// Modulus of convexity of `‖·‖^σ'/σ'` on the data space.
    pub modulus: ConvexityModulus,
    /// Regularization used to approximate `u†` when none is supplied.
    pub alpha_ref: f64,
    pub u_dagger: Option<ScalarField>,
    /// Also solve the noiseless problem at each `α_n` to measure `‖v_{α,w} − v_{α,0}‖`.
    pub dual_distance: bool,
    /// `|u|` above which a cell counts towards the support radius.
    pub support_level: f64,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        Self {
            solve: SolveOptions::default(),
            levels: 0,
            thresholds: vec![0.5],
            eta: None,
            modulus: ConvexityModulus::hilbert(),
            alpha_ref: 1e-3,
            u_dagger: None,
            dual_distance: false,
            support_level: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SequenceRow {
    pub alpha: f64,
    /// `‖w_n‖_Y` on the grid.
    pub w_norm: f64,
    pub u: ScalarField,
    pub v: ScalarField,
    pub gap: f64,
    pub primal_value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `‖u_n − u†‖_{L¹}`.
    pub l1_error: f64,
    /// `d_H({u_n > s}, {u† > s})` per threshold.
    pub hausdorff: Vec<f64>,
    /// `‖v_{α,w} − v_{α,0}‖_{q'}`.
    pub dual_distance: Option<f64>,
    pub verdict: ParameterVerdict,
    /// `max |x|` over cells with `|u(x)|` above the support level.
    pub support_radius: f64,
}

#[derive(Debug, Clone)]
pub struct SequenceResult {
    pub u_dagger: ScalarField,
    pub rows: Vec<SequenceRow>,
}

/// Solves `template` along a schedule and measures convergence towards `u†`.
pub fn solve_sequence(
    template: &ProblemSpec,
    schedule: &[ScheduleEntry],
    opts: &SequenceOptions,
) -> Result<SequenceResult> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("schedule is empty".into()));
    }
    let grid = template.grid().clone();
    let d = grid.dim();
    let eta = match opts.eta {
        Some(e) => e,
        None => 0.99 * isoperimetric_constant(d)?,
    };
    let noiseless = template.with_noise(vec![0.0; template.operator().data_len()])?;
    let u_dagger = match &opts.u_dagger {
        Some(u) => {
            grid.check_same(u.grid())?;
            u.clone()
        }
        None => solve_multilevel(&noiseless.with_alpha(opts.alpha_ref)?, opts.solve, opts.levels)?.u,
    };
    let dagger_sets: Vec<_> = opts.thresholds.iter().map(|&s| level_set(&u_dagger, s)).collect();

    let rows = schedule
        .par_iter()
        .map(|entry| -> Result<SequenceRow> {
            let spec = template.with_noise(entry.w.clone())?.with_alpha(entry.alpha)?;
            let sol: Solution = solve_multilevel(&spec, opts.solve, opts.levels)?;
            let w_norm = spec.data_norm(&entry.w);
            let verdict = parameter_choice_check(
                w_norm,
                entry.alpha,
                spec.sigma(),
                spec.operator().opnorm_bound(),
                eta,
                d,
                &opts.modulus,
            )?;
            let l1_error = sol.u.sub(&u_dagger)?.l1_norm();
            let hausdorff = opts
                .thresholds
                .iter()
                .zip(&dagger_sets)
                .map(|(&s, target)| hausdorff_distance(&level_set(&sol.u, s), target))
                .collect::<Result<Vec<_>>>()?;
            let dual_distance = if opts.dual_distance {
                let clean = solve_multilevel(&noiseless.with_alpha(entry.alpha)?, opts.solve, opts.levels)?;
                let diff: Vec<f64> = sol.v.values().iter().zip(clean.v.values()).map(|(a, b)| a - b).collect();
                let qp = spec.q() / (spec.q() - 1.0);
                Some(weighted_norm(&diff, qp, grid.cell_volume()))
            } else {
                None
            };
            let support_radius = support_radius(&sol.u, opts.support_level);
            Ok(SequenceRow {
                alpha: entry.alpha,
                w_norm,
                gap: sol.gap,
                primal_value: sol.primal_value,
                iterations: sol.iterations,
                converged: sol.converged,
                l1_error,
                hausdorff,
                dual_distance,
                verdict,
                support_radius,
                u: sol.u,
                v: sol.v,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SequenceResult { u_dagger, rows })
}

/// `max |x|` over cell centers with `|u(x)| > level`, or 0 if there are none.
pub fn support_radius(u: &ScalarField, level: f64) -> f64 {
    let grid = u.grid();
    u.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > level)
        .map(|(i, _)| grid.center(i).iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}
