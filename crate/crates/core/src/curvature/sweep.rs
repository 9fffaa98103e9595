use super::cut::{min_cut_geometric, CutProblem};
use crate::error::{Error, Result};
use crate::grid::{Boundary, IndicatorSet, ScalarField};

/// `count` geometrically spaced values from `lo` to `hi`.
pub fn geometric_lambdas(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 {
        return Err(Error::InvalidArgument(format!("bad λ range [{lo}, {hi}] with {count} values")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let ratio = (hi / lo).powf(1.0 / (count - 1) as f64);
    Ok((0..count).map(|k| if k + 1 == count { hi } else { lo * ratio.powi(k as i32) }).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSweepOptions {
    pub boundary: Boundary,
    /// Re-solve each step without the lower bound and compare energies.
    pub verify_nesting: bool,
}

impl Default for GridSweepOptions {
    fn default() -> Self {
        Self { boundary: Boundary::Neumann, verify_nesting: false }
    }
}

#[derive(Debug, Clone)]
pub struct GridSweep {
    pub lambdas: Vec<f64>,
    /// Nested minimizers `E_λ`, one per λ.
    pub sets: Vec<IndicatorSet>,
    /// `λ h(x)` at the first λ whose minimizer contains `x`; zero elsewhere.
    pub kappa: ScalarField,
    pub assigned: IndicatorSet,
    /// Cells of `E` not reached by the largest λ.
    pub unassigned: IndicatorSet,
}

impl GridSweep {
    /// `(min, max)` of κ over the assigned cells.
    pub fn kappa_range(&self) -> Option<(f64, f64)> {
        let vals = self.assigned.mask().iter().zip(self.kappa.values()).filter(|(m, _)| **m).map(|(_, v)| *v);
        vals.fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    /// `h^d Σ_E |κ|`.
    pub fn kappa_mass(&self) -> f64 {
        self.kappa.l1_norm()
    }
}

/// Staircase variational curvature of `E` from nested minimizers of
/// `Per(F) − λ ∫_F h` over `F ⊆ E`, for increasing `λ`.
pub fn lambda_sweep_grid(
    set: &IndicatorSet,
    density: &ScalarField,
    lambdas: &[f64],
    opts: GridSweepOptions,
) -> Result<GridSweep> {
    let grid = set.grid();
    grid.check_same(density.grid())?;
    if lambdas.is_empty() || lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::InvalidArgument("λ values must be positive and finite".into()));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("λ values must be strictly increasing".into()));
    }
    if set.mask().iter().zip(density.values()).any(|(m, h)| *m && !(*h > 0.0)) {
        return Err(Error::InvalidArgument("density must be positive on the set".into()));
    }

    let mut prev = IndicatorSet::empty(grid.clone());
    let mut kappa = ScalarField::zeros(grid.clone());
    let mut sets = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let g = density.scaled(lambda);
        let free = CutProblem::new(g, opts.boundary).within(set.clone());
        let prob = free.clone().containing(prev.clone());
        let res = min_cut_geometric(&prob)?;
        if opts.verify_nesting {
            let check = min_cut_geometric(&free)?;
            let tol = 1e-9 * (1.0 + check.energy.abs());
            if res.energy > check.energy + tol || !prev.is_subset_of(&check.set)? {
                return Err(Error::NestingViolation(format!(
                    "at λ = {lambda}: constrained energy {} vs free {}",
                    res.energy, check.energy
                )));
            }
        }
        for (i, (now, before)) in res.set.mask().iter().zip(prev.mask()).enumerate() {
            if *now && !*before {
                kappa.values_mut()[i] = lambda * density.values()[i];
            }
        }
        prev = res.set.clone();
        sets.push(res.set);
    }
    let unassigned = set.difference(&prev)?;
    Ok(GridSweep { lambdas: lambdas.to_vec(), sets, kappa, assigned: prev, unassigned })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ball_indicator, perimeter, Grid, PerimeterMode};
    use crate::oracles::annulus_curvature;

    fn disc_grid(h: f64, half: f64) -> Grid {
        Grid::covering(&[-half, -half], &[half, half], h).unwrap()
    }

    #[test]
    fn geometric_spacing() {
        let l = geometric_lambdas(1.0, 8.0, 4).unwrap();
        assert_eq!(l.len(), 4);
        assert!((l[1] - 2.0).abs() < 1e-12 && (l[2] - 4.0).abs() < 1e-12 && l[3] == 8.0);
        assert!(geometric_lambdas(0.0, 1.0, 3).is_err());
    }

    #[test]
    fn sweep_is_nested_and_below_transition_is_unassigned() {
        let grid = disc_grid(1.0 / 8.0, 1.5);
        let e = ball_indicator(&grid, &[0.0, 0.0], 1.0).unwrap();
        let dens = ScalarField::constant(grid.clone(), 1.0);
        let lambdas = geometric_lambdas(0.5, 5.0, 30).unwrap();
        let opts = GridSweepOptions { verify_nesting: true, ..Default::default() };
        let sweep = lambda_sweep_grid(&e, &dens, &lambdas, opts).unwrap();
        for w in sweep.sets.windows(2) {
            assert!(w[0].is_subset_of(&w[1]).unwrap());
        }
        assert_eq!(sweep.assigned, e);
        assert!(sweep.unassigned.is_empty());

        let low = geometric_lambdas(0.1, 1.0, 5).unwrap();
        let none = lambda_sweep_grid(&e, &dens, &low, opts).unwrap();
        assert_eq!(none.unassigned, e);
        assert!(none.assigned.is_empty());
        assert_eq!(none.kappa.l1_norm(), 0.0);
    }

    #[test]
    fn kappa_mass_is_close_to_perimeter() {
        // ∫_E κ = Per(E) for the exact sweep; the staircase overshoots by at most one λ step.
        let h = 1.0 / 24.0;
        let grid = disc_grid(h, 1.25);
        let e = ball_indicator(&grid, &[0.0, 0.0], 1.0).unwrap();
        let dens = ScalarField::constant(grid.clone(), 1.0);
        // Single-cell spikes of the digitized boundary only enter at λ ≈ 2/h.
        let lambdas = geometric_lambdas(1.0, 4.0 / h, 400).unwrap();
        let sweep = lambda_sweep_grid(&e, &dens, &lambdas, GridSweepOptions::default()).unwrap();
        assert!(sweep.unassigned.is_empty());
        let per = perimeter(&e, PerimeterMode::anisotropic(Boundary::Neumann));
        let ratio = sweep.kappa_mass() / per;
        let step = lambdas[1] / lambdas[0];
        assert!(ratio <= step + 1e-12 && ratio >= 1.0 / step, "{ratio}");
    }

    #[test]
    fn annulus_sweep_is_bounded_by_anisotropic_factor() {
        let h = 1.0 / 8.0;
        let grid = disc_grid(h, 4.5);
        let outer = ball_indicator(&grid, &[0.0, 0.0], 4.0).unwrap();
        let inner = ball_indicator(&grid, &[0.0, 0.0], 2.0).unwrap();
        let e = outer.difference(&inner).unwrap();
        let dens = ScalarField::constant(grid.clone(), 1.0);
        let lambdas = geometric_lambdas(0.5, 3.0, 200).unwrap();
        let sweep = lambda_sweep_grid(&e, &dens, &lambdas, GridSweepOptions::default()).unwrap();
        let (lo, hi) = sweep.kappa_range().unwrap();
        let exact = annulus_curvature(2.0, 4.0).unwrap();
        // The whole annulus enters at once, at the ℓ¹ ratio Per/|A| ≈ (4/π)·2/(r2 − r1).
        let aniso = perimeter(&e, PerimeterMode::anisotropic(Boundary::Neumann)) / e.volume();
        let step = lambdas[1] / lambdas[0];
        assert!(lo >= aniso && lo <= aniso * step && hi <= 1.1 * aniso, "{lo} {hi} {aniso}");
        assert!((aniso / exact - 4.0 / std::f64::consts::PI).abs() < 0.05);
    }
}
