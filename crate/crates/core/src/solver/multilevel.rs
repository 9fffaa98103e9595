use super::gradient::{EdgeField, Gradient};
use super::operator::{ForwardOperator, OperatorKind};
use super::pdhg::{solve, solve_from, Solution, SolveOptions};
use super::problem::ProblemSpec;
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};

/// Grid with twice the spacing covering the same box.
pub fn coarsen_grid(grid: &Grid) -> Result<Grid> {
    if grid.shape().iter().any(|n| n % 2 != 0) {
        return Err(Error::InvalidGrid(format!("shape {:?} is not divisible by two", grid.shape())));
    }
    let h = grid.spacing();
    let origin = grid.origin().iter().map(|o| o + 0.5 * h).collect();
    Grid::new(grid.shape().iter().map(|n| n / 2).collect(), 2.0 * h, origin)
}

/// Block averages over `2^d` cells.
pub fn restrict_average(field: &ScalarField, coarse: &Grid) -> Result<ScalarField> {
    let fine = field.grid();
    let d = fine.dim();
    let mut sum = vec![0.0; coarse.len()];
    for (i, v) in field.values().iter().enumerate() {
        let idx: Vec<usize> = fine.multi_index(i).into_iter().map(|j| j / 2).collect();
        sum[coarse.index_of(&idx)] += v;
    }
    let scale = 1.0 / (1u64 << d) as f64;
    ScalarField::new(coarse.clone(), sum.into_iter().map(|s| s * scale).collect())
}

/// Coarse-to-fine continuation for denoising problems: each level is solved to
/// `opts.tol` and injected as the starting point of the next finer one.
pub fn solve_multilevel(spec: &ProblemSpec, opts: SolveOptions, levels: usize) -> Result<Solution> {
    if levels == 0 {
        return solve(spec, opts);
    }
    if spec.operator().kind() != OperatorKind::Identity {
        return Err(Error::Unsupported("multilevel continuation needs the identity operator".into()));
    }
    let grid = spec.grid();
    let coarse_grid = coarsen_grid(grid)?;
    let data = ScalarField::new(grid.clone(), spec.data())?;
    let coarse_data = restrict_average(&data, &coarse_grid)?;
    let coarse = ProblemSpec::new(
        ForwardOperator::identity(coarse_grid.clone()),
        coarse_data.values().to_vec(),
        vec![0.0; coarse_grid.len()],
        spec.alpha(),
        spec.q(),
        spec.sigma(),
        spec.mode(),
    )?;
    let cs = solve_multilevel(&coarse, opts, levels - 1)?;

    let mut u = vec![0.0; grid.len()];
    for (i, v) in u.iter_mut().enumerate() {
        let idx: Vec<usize> = grid.multi_index(i).into_iter().map(|j| j / 2).collect();
        *v = cs.u.values()[coarse_grid.index_of(&idx)];
    }
    let fine_grad = Gradient::new(grid, spec.mode());
    let z = fine_grad.prolong_from(&Gradient::new(&coarse_grid, spec.mode()), cs.z.values());
    let start = Solution {
        u: ScalarField::new(grid.clone(), u)?,
        z: EdgeField::new(grid, spec.mode(), z)?,
        p: Vec::new(),
        v: ScalarField::zeros(grid.clone()),
        primal_value: f64::NAN,
        dual_value: f64::NAN,
        gap: f64::NAN,
        iterations: 0,
        converged: false,
        dual_feasibility: 0.0,
        history: Vec::new(),
    };
    let mut sol = solve_from(spec, opts, Some(&start))?;
    sol.iterations += cs.iterations;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ball_indicator, Boundary, PerimeterMode};

    #[test]
    fn coarsening_preserves_the_box_and_means() {
        let grid = Grid::covering(&[-1.0, 0.0], &[1.0, 1.0], 0.125).unwrap();
        let c = coarsen_grid(&grid).unwrap();
        assert_eq!(c.shape(), &[8, 4]);
        let f = ScalarField::from_fn(grid.clone(), |x| x[0] * x[0] + x[1]).unwrap();
        let fc = restrict_average(&f, &c).unwrap();
        assert!(
            (f.values().iter().sum::<f64>() * grid.cell_volume() - fc.values().iter().sum::<f64>() * c.cell_volume())
                .abs()
                < 1e-12
        );
        assert!(coarsen_grid(&Grid::new(vec![3, 4], 1.0, vec![0.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn continuation_reaches_the_same_optimum() {
        let grid = Grid::covering(&[-1.5, -1.5], &[1.5, 1.5], 1.0 / 16.0).unwrap();
        let f = ScalarField::from_indicator(&ball_indicator(&grid, &[0.1, 0.0], 1.0).unwrap(), 1.0);
        for mode in [PerimeterMode::isotropic(Boundary::Dirichlet), PerimeterMode::anisotropic(Boundary::Periodic)] {
            let spec = ProblemSpec::denoising(&f, None, 0.15, mode).unwrap();
            let opts = SolveOptions::with_tol(1e-8);
            let direct = solve(&spec, opts).unwrap();
            let ml = solve_multilevel(&spec, opts, 2).unwrap();
            assert!(ml.converged && direct.converged);
            assert!((ml.primal_value - direct.primal_value).abs() < 2e-8 * (1.0 + direct.primal_value));
            assert!(ml.z.dual_norm() <= 1.0 + 1e-12);
        }
    }
}
