use std::io::Write;

use super::cut::{cut_energy, min_cut_geometric, CutProblem};
use crate::error::{Error, Result};
use crate::grid::perimeter::for_each_forward_pair;
use crate::grid::{ball_indicator, level_set, perimeter, Boundary, IndicatorSet, PerimeterMode, ScalarField};

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetCheck {
    pub thresholds: Vec<f64>,
    /// Energy of the tested level set minus the exact minimum, per threshold.
    pub violations: Vec<f64>,
    /// Exact minimum energy per threshold.
    pub minima: Vec<f64>,
    /// Max-flow values, for audit.
    pub flows: Vec<f64>,
}

impl LevelSetCheck {
    pub fn max_violation(&self) -> f64 {
        self.violations.iter().copied().fold(0.0, f64::max)
    }

    /// Largest `|minimum|`, a natural scale for tolerances.
    pub fn energy_scale(&self) -> f64 {
        self.minima.iter().map(|e| e.abs()).fold(0.0, f64::max)
    }

    /// One `threshold,violation,minimum,flow` row per threshold.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["threshold", "violation", "min_energy", "flow"])?;
        for k in 0..self.thresholds.len() {
            w.write_record(&[
                self.thresholds[k].to_string(),
                self.violations[k].to_string(),
                self.minima[k].to_string(),
                self.flows[k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Tests that level sets of `u` minimize the energy with curvature `v`.
///
/// For `s ≥ 0` the set `{u > s}` is compared against the minimum of
/// `Per(F) − ∫_F v`. For `s < 0` the superlevel set is unbounded in the
/// zero extension, so its bounded complement `{u ≤ s}` is compared against
/// the minimum of `Per(F) + ∫_F v`. Both follow from `v ∈ ∂TV(u)`.
pub fn check_level_set_minimality(
    u: &ScalarField,
    v: &ScalarField,
    thresholds: &[f64],
    boundary: Boundary,
) -> Result<LevelSetCheck> {
    u.grid().check_same(v.grid())?;
    let neg = v.scaled(-1.0);
    let mut out = LevelSetCheck {
        thresholds: thresholds.to_vec(),
        violations: Vec::with_capacity(thresholds.len()),
        minima: Vec::with_capacity(thresholds.len()),
        flows: Vec::with_capacity(thresholds.len()),
    };
    for &s in thresholds {
        let (set, g) = if s >= 0.0 { (level_set(u, s), v) } else { (level_set(u, s).complement(), &neg) };
        let best = min_cut_geometric(&CutProblem::new(g.clone(), boundary))?;
        out.violations.push(cut_energy(&set, g, boundary) - best.energy);
        out.minima.push(best.energy);
        out.flows.push(best.flow);
    }
    Ok(out)
}

/// `Per(E ∩ B) − ∫_{E∩B} v − 2 Per(B; E)` for the digitized ball `B = B(x, r)`.
///
/// `Per(B; E)` counts faces of `B` with both cells in `E`. The quantity equals
/// `energy(E) − energy(E ∖ B)` exactly, so it is nonpositive when `E` minimizes
/// `Per(F) − ∫_F v`.
pub fn compare_ball_residual(
    set: &IndicatorSet,
    v: &ScalarField,
    center: &[f64],
    r: f64,
    boundary: Boundary,
) -> Result<f64> {
    let grid = set.grid();
    grid.check_same(v.grid())?;
    let ball = ball_indicator(grid, center, r)?;
    let cap = set.intersection(&ball)?;
    let mode = PerimeterMode::anisotropic(boundary);
    let mass: f64 = cap.mask().iter().zip(v.values()).filter(|(m, _)| **m).map(|(_, x)| x).sum();
    let lhs = perimeter(&cap, mode) - grid.cell_volume() * mass;

    let (e, b) = (set.mask(), ball.mask());
    let mut faces = 0usize;
    for axis in 0..grid.dim() {
        for_each_forward_pair(grid, axis, boundary == Boundary::Periodic, |i, j| {
            faces += (e[i] && e[j] && b[i] != b[j]) as usize;
        });
    }
    Ok(lhs - 2.0 * grid.face_area() * faces as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityRow {
    pub radius: f64,
    /// `min_x |E ∩ B(x,r)| / |B(x,r)|` over boundary cells `x`.
    pub inner: f64,
    /// `min_x |B(x,r) ∖ E| / |B(x,r)|`.
    pub outer: f64,
}

/// Volume fractions of `E` and its complement in balls centered on `∂E`.
///
/// `|B(x, r)|` is the volume of the digitized ball clipped to the grid, so
/// fractions are relative to the domain.
pub fn density_estimate_profile(set: &IndicatorSet, radii: &[f64]) -> Result<Vec<DensityRow>> {
    let grid = set.grid();
    let boundary = set.boundary_cells();
    if boundary.is_empty() {
        return Err(Error::InvalidArgument("set has no boundary cells".into()));
    }
    let d = grid.dim();
    let h = grid.spacing();
    let shape = grid.shape();
    let strides = grid.strides();
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
        }
        let offsets = ball_offsets(d, r / h);
        let (mut inner, mut outer) = (f64::INFINITY, f64::INFINITY);
        for &x in &boundary {
            let idx = grid.multi_index(x);
            let (mut total, mut inside) = (0usize, 0usize);
            'off: for off in &offsets {
                let mut lin = 0usize;
                for k in 0..d {
                    let c = idx[k] as i64 + off[k];
                    if c < 0 || c >= shape[k] as i64 {
                        continue 'off;
                    }
                    lin += c as usize * strides[k];
                }
                total += 1;
                inside += set.contains(lin) as usize;
            }
            let t = total as f64;
            inner = inner.min(inside as f64 / t);
            outer = outer.min((total - inside) as f64 / t);
        }
        rows.push(DensityRow { radius: r, inner, outer });
    }
    Ok(rows)
}

/// Integer offsets of Euclidean length at most `rho`.
fn ball_offsets(d: usize, rho: f64) -> Vec<Vec<i64>> {
    let m = rho.floor() as i64;
    let side = (2 * m + 1) as usize;
    let mut out = Vec::new();
    let total = side.pow(d as u32);
    for mut lin in 0..total {
        let mut off = vec![0i64; d];
        for o in off.iter_mut().rev() {
            *o = (lin % side) as i64 - m;
            lin /= side;
        }
        if off.iter().map(|o| (o * o) as f64).sum::<f64>() <= rho * rho + 1e-9 {
            out.push(off);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ball_indicator, Grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid2(n: usize, h: f64) -> Grid {
        Grid::new(vec![n, n], h, vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn zero_function_passes() {
        let grid = grid2(6, 0.5);
        let u = ScalarField::zeros(grid.clone());
        let v = ScalarField::zeros(grid);
        let c = check_level_set_minimality(&u, &v, &[-0.5, 0.0, 0.5], Boundary::Dirichlet).unwrap();
        assert_eq!(c.max_violation(), 0.0);
    }

    #[test]
    fn indicator_of_minimizer_passes_and_scaled_field_fails() {
        let h = 1.0 / 16.0;
        let grid = Grid::covering(&[-2.0, -2.0], &[2.0, 2.0], h).unwrap();
        let ball = ball_indicator(&grid, &[0.0, 0.0], 1.0).unwrap();
        let g = ScalarField::from_indicator(&ball, 3.0);
        let best = min_cut_geometric(&CutProblem::new(g.clone(), Boundary::Dirichlet)).unwrap();
        let u = ScalarField::from_indicator(&best.set, 1.0);
        let ok = check_level_set_minimality(&u, &g, &[0.5], Boundary::Dirichlet).unwrap();
        assert_eq!(ok.max_violation(), 0.0);
        // A curvature too small for the disc makes ∅ strictly better.
        let small = g.scaled(0.5);
        let bad = check_level_set_minimality(&u, &small, &[0.5], Boundary::Dirichlet).unwrap();
        assert!(bad.max_violation() > 0.1);
    }

    #[test]
    fn negative_thresholds_use_the_complement() {
        let grid = grid2(8, 1.0);
        let hole = ball_indicator(&grid, &[3.5, 3.5], 2.0).unwrap();
        // u = −1_hole; v = −(curvature of the hole) realizes v ∈ ∂TV(u).
        let u = ScalarField::from_indicator(&hole, -1.0);
        let kappa = ScalarField::from_indicator(&hole, 3.0);
        let c = check_level_set_minimality(&u, &kappa.scaled(-1.0), &[-0.5], Boundary::Dirichlet).unwrap();
        let direct = min_cut_geometric(&CutProblem::new(kappa.clone(), Boundary::Dirichlet)).unwrap();
        assert_eq!(c.minima[0], direct.energy);
        assert!((c.violations[0] - (cut_energy(&hole, &kappa, Boundary::Dirichlet) - direct.energy)).abs() < 1e-12);
    }

    #[test]
    fn ball_residual_identity() {
        // energy(E) − energy(E ∖ B), checked against direct evaluation.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let grid = grid2(12, 0.5);
        for b in [Boundary::Dirichlet, Boundary::Neumann, Boundary::Periodic] {
            for _ in 0..50 {
                let e =
                    IndicatorSet::new(grid.clone(), (0..grid.len()).map(|_| rng.random_bool(0.6)).collect()).unwrap();
                let v = ScalarField::from_fn(grid.clone(), |_| rng.random_range(-3.0..3.0)).unwrap();
                let c = [rng.random_range(0.0..6.0), rng.random_range(0.0..6.0)];
                let r = rng.random_range(0.3..3.0);
                let ball = ball_indicator(&grid, &c, r).unwrap();
                let rest = e.difference(&ball).unwrap();
                let expected = cut_energy(&e, &v, b) - cut_energy(&rest, &v, b);
                let got = compare_ball_residual(&e, &v, &c, r, b).unwrap();
                assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
            }
        }
        let empty = IndicatorSet::empty(grid.clone());
        assert_eq!(
            compare_ball_residual(&empty, &ScalarField::zeros(grid), &[1.0, 1.0], 2.0, Boundary::Neumann).unwrap(),
            0.0
        );
    }

    #[test]
    fn ball_residual_signs() {
        let h = 1.0 / 16.0;
        let grid = Grid::covering(&[-1.5, -1.5], &[1.5, 1.5], h).unwrap();
        let disc = ball_indicator(&grid, &[0.0, 0.0], 1.0).unwrap();
        let g = ScalarField::from_indicator(&disc, 3.0);
        let e = min_cut_geometric(&CutProblem::new(g.clone(), Boundary::Dirichlet)).unwrap().set;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let bnd = e.boundary_cells();
        for _ in 0..20 {
            let x = grid.center(bnd[rng.random_range(0..bnd.len())]);
            let r = 10f64.powf(rng.random_range(-1.0..0.0));
            assert!(compare_ball_residual(&e, &g, &x, r, Boundary::Dirichlet).unwrap() <= 1e-12);
        }
        // A ring of isolated cells is not a minimizer.
        let noise = IndicatorSet::from_fn(grid.clone(), |x| {
            ((x[0] * 16.0).round() as i64 + (x[1] * 16.0).round() as i64) % 2 == 0
        });
        let worst = (0..20)
            .map(|k| compare_ball_residual(&noise, &g, &[0.05 * k as f64, 0.0], 0.3, Boundary::Dirichlet).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(worst > 0.0);
    }

    #[test]
    fn density_of_single_cell_and_half_space() {
        let grid = grid2(21, 1.0);
        let mut single = IndicatorSet::empty(grid.clone());
        single.mask_mut()[grid.index_of(&[10, 10])] = true;
        let rows = density_estimate_profile(&single, &[3.0]).unwrap();
        // 29 lattice points within distance 3.
        assert!((rows[0].inner - 1.0 / 29.0).abs() < 1e-15);
        assert!((rows[0].outer - 28.0 / 29.0).abs() < 1e-15);

        let half = IndicatorSet::from_fn(grid.clone(), |x| x[0] < 10.5);
        let rows = density_estimate_profile(&half, &[8.0]).unwrap();
        assert!((rows[0].inner - 0.5).abs() < 0.1, "{:?}", rows[0]);
        assert!((rows[0].outer - 0.5).abs() < 0.1, "{:?}", rows[0]);

        assert!(density_estimate_profile(&IndicatorSet::full(grid.clone()), &[1.0]).is_err());
        assert!(density_estimate_profile(&IndicatorSet::empty(grid), &[1.0]).is_err());
    }

    #[test]
    fn density_of_disc() {
        let h = 1.0;
        let grid = Grid::covering(&[-30.0, -30.0], &[30.0, 30.0], h).unwrap();
        let disc = ball_indicator(&grid, &[0.0, 0.0], 24.0).unwrap();
        let rows = density_estimate_profile(&disc, &[6.0]).unwrap();
        assert!(rows[0].inner >= 0.3, "{:?}", rows[0]);
    }
}
