use super::{Anisotropy, Boundary, IndicatorSet, PerimeterMode, ScalarField};
use crate::error::Result;

/// Discrete total variation of `u`.
///
/// Anisotropic: `h^(d-1) Σ_faces |u_i - u_j|`. Isotropic: `h^d Σ_cells |∇_h u|_2`
/// with forward differences. Dirichlet treats `u` as extended by zero, which is
/// the same as zero-padding one layer and then using Neumann differences.
pub fn total_variation(u: &ScalarField, mode: PerimeterMode) -> f64 {
    if mode.boundary == Boundary::Dirichlet {
        let padded = u.zero_padded();
        return total_variation(&padded, PerimeterMode::new(mode.anisotropy, Boundary::Neumann));
    }
    let grid = u.grid();
    let periodic = mode.boundary == Boundary::Periodic;
    let v = u.values();
    match mode.anisotropy {
        Anisotropy::Anisotropic => {
            let mut sum = 0.0;
            for axis in 0..grid.dim() {
                for_each_forward_pair(grid, axis, periodic, |i, j| sum += (v[j] - v[i]).abs());
            }
            grid.face_area() * sum
        }
        Anisotropy::Isotropic => {
            let mut sq = vec![0.0; v.len()];
            for axis in 0..grid.dim() {
                for_each_forward_pair(grid, axis, periodic, |i, j| {
                    let d = v[j] - v[i];
                    sq[i] += d * d;
                });
            }
            grid.face_area() * sq.iter().map(|s| s.sqrt()).sum::<f64>()
        }
    }
}

/// Calls `f(i, j)` for each cell `i` whose forward neighbour `j` along `axis` exists.
pub(crate) fn for_each_forward_pair(grid: &super::Grid, axis: usize, periodic: bool, mut f: impl FnMut(usize, usize)) {
    let lay = grid.axis_layout(axis);
    if lay.n < 2 {
        return;
    }
    for o in 0..lay.outer {
        for j in 0..lay.n {
            let next = if j + 1 < lay.n {
                j + 1
            } else if periodic {
                0
            } else {
                continue;
            };
            let base = lay.index(o, j, 0);
            let nb = lay.index(o, next, 0);
            for r in 0..lay.inner {
                f(base + r, nb + r);
            }
        }
    }
}

/// `Per(E) = TV(1_E)` in the given mode.
pub fn perimeter(set: &IndicatorSet, mode: PerimeterMode) -> f64 {
    if mode.anisotropy == Anisotropy::Anisotropic {
        let grid = set.grid();
        let m = set.mask();
        let mut faces = 0usize;
        for axis in 0..grid.dim() {
            for_each_forward_pair(grid, axis, mode.boundary == Boundary::Periodic, |i, j| {
                faces += (m[i] != m[j]) as usize;
            });
            if mode.boundary == Boundary::Dirichlet {
                let lay = grid.axis_layout(axis);
                for o in 0..lay.outer {
                    for r in 0..lay.inner {
                        faces += m[lay.index(o, 0, r)] as usize;
                        faces += m[lay.index(o, lay.n - 1, r)] as usize;
                    }
                }
            }
        }
        return grid.face_area() * faces as f64;
    }
    total_variation(&ScalarField::from_indicator(set, 1.0), mode)
}

/// `{u > s}`.
pub fn level_set(u: &ScalarField, s: f64) -> IndicatorSet {
    let mask = u.values().iter().map(|&v| v > s).collect();
    IndicatorSet { grid: u.grid().clone(), mask }
}

/// `h^d · #(E xor F)`.
pub fn symmetric_difference_volume(e: &IndicatorSet, f: &IndicatorSet) -> Result<f64> {
    e.grid().check_same(f.grid())?;
    let n = e.mask().iter().zip(f.mask()).filter(|(a, b)| a != b).count();
    Ok(e.grid().cell_volume() * n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoareaReport {
    pub tv: f64,
    pub integral: f64,
    pub gap: f64,
}

/// Compares the anisotropic TV with the layer-cake integral `∫ Per({u > s}) ds`.
///
/// Under Dirichlet conditions the exterior value 0 is one of the levels, and for
/// `s < 0` the superlevel set contains the whole exterior, so its perimeter is
/// the one of the bounded complement `{u <= s}`.
pub fn coarea_check(u: &ScalarField, boundary: Boundary) -> CoareaReport {
    let mode = PerimeterMode::anisotropic(boundary);
    let tv = total_variation(u, mode);
    let mut levels: Vec<f64> = u.values().to_vec();
    if boundary == Boundary::Dirichlet {
        levels.push(0.0);
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut integral = 0.0;
    for w in levels.windows(2) {
        let s = w[0];
        let e = level_set(u, s);
        let per = if boundary == Boundary::Dirichlet && s < 0.0 {
            perimeter(&e.complement(), mode)
        } else {
            perimeter(&e, mode)
        };
        integral += (w[1] - w[0]) * per;
    }
    CoareaReport { tv, integral, gap: (tv - integral).abs() }
}
