use crate::error::{Error, Result};
use crate::grid::{Anisotropy, Boundary, Grid, PerimeterMode, ScalarField};

/// Forward-difference gradient matching [`crate::grid::total_variation`].
///
/// Edge values live on an extended grid: the one-layer padding under Dirichlet
/// conditions, the grid itself otherwise. Component `k` of cell `i` sits at
/// `k * n_ext + i`; edges without a forward neighbour are identically zero.
#[derive(Debug, Clone)]
pub(crate) struct Gradient {
    grid: Grid,
    ext: Grid,
    mode: PerimeterMode,
}

impl Gradient {
    pub fn new(grid: &Grid, mode: PerimeterMode) -> Self {
        let ext = if mode.boundary == Boundary::Dirichlet { grid.padded() } else { grid.clone() };
        Self { grid: grid.clone(), ext, mode }
    }

    pub fn ext_len(&self) -> usize {
        self.ext.len()
    }

    pub fn edge_len(&self) -> usize {
        self.ext.len() * self.ext.dim()
    }

    fn padded(&self) -> bool {
        self.mode.boundary == Boundary::Dirichlet
    }

    /// Copies `u` into `buf` (length `ext_len`), zero-padding if needed.
    pub fn lift(&self, u: &[f64], buf: &mut [f64]) {
        if !self.padded() {
            buf.copy_from_slice(u);
            return;
        }
        buf.iter_mut().for_each(|b| *b = 0.0);
        let inner = *self.grid.shape().last().unwrap();
        let d = self.grid.dim();
        let ext_strides = self.ext.strides();
        let mut idx = vec![0usize; d];
        for (row, chunk) in u.chunks_exact(inner).enumerate() {
            let mut rest = row;
            for k in (0..d - 1).rev() {
                idx[k] = rest % self.grid.shape()[k];
                rest /= self.grid.shape()[k];
            }
            let start: usize = (0..d - 1).map(|k| (idx[k] + 1) * ext_strides[k]).sum::<usize>() + 1;
            buf[start..start + inner].copy_from_slice(chunk);
        }
    }

    /// Inverse of [`Gradient::lift`] on the interior cells.
    pub fn restrict(&self, buf: &[f64], out: &mut [f64]) {
        if !self.padded() {
            out.copy_from_slice(buf);
            return;
        }
        let inner = *self.grid.shape().last().unwrap();
        let d = self.grid.dim();
        let ext_strides = self.ext.strides();
        let mut idx = vec![0usize; d];
        for (row, chunk) in out.chunks_exact_mut(inner).enumerate() {
            let mut rest = row;
            for k in (0..d - 1).rev() {
                idx[k] = rest % self.grid.shape()[k];
                rest /= self.grid.shape()[k];
            }
            let start: usize = (0..d - 1).map(|k| (idx[k] + 1) * ext_strides[k]).sum::<usize>() + 1;
            chunk.copy_from_slice(&buf[start..start + inner]);
        }
    }

    /// Calls `f(edge_start, i_start, j_start, len)` for runs of contiguous edges
    /// `i → j` along `axis`, or `f(edge_start, i_start, None, len)` for cells
    /// without a forward neighbour.
    fn for_each_run(&self, axis: usize, mut f: impl FnMut(usize, usize, Option<usize>, usize)) {
        let lay = self.ext.axis_layout(axis);
        let periodic = self.mode.boundary == Boundary::Periodic;
        let off = axis * self.ext.len();
        for o in 0..lay.outer {
            let first = lay.index(o, 0, 0);
            let last = lay.index(o, lay.n - 1, 0);
            if lay.n > 1 {
                f(off + first, first, Some(first + lay.inner), last - first);
            }
            let wrap = (periodic && lay.n > 1).then_some(first);
            f(off + last, last, wrap, lay.inner);
        }
    }

    /// `z = D u_ext` with differences divided by `h`.
    pub fn apply(&self, u_ext: &[f64], z: &mut [f64]) {
        let inv_h = 1.0 / self.grid.spacing();
        for axis in 0..self.ext.dim() {
            self.for_each_run(axis, |e, i, j, len| match j {
                Some(j) => {
                    let (zs, ui, uj) = (&mut z[e..e + len], &u_ext[i..i + len], &u_ext[j..j + len]);
                    for r in 0..len {
                        zs[r] = (uj[r] - ui[r]) * inv_h;
                    }
                }
                None => z[e..e + len].iter_mut().for_each(|v| *v = 0.0),
            });
        }
    }

    /// `out = Dᵀ z` on the extended grid (plain transpose).
    pub fn transpose(&self, z: &[f64], out: &mut [f64]) {
        let inv_h = 1.0 / self.grid.spacing();
        out.iter_mut().for_each(|v| *v = 0.0);
        for axis in 0..self.ext.dim() {
            self.for_each_run(axis, |e, i, j, len| {
                if let Some(j) = j {
                    let zs = &z[e..e + len];
                    for (o, w) in out[i..i + len].iter_mut().zip(zs) {
                        *o -= w * inv_h;
                    }
                    for (o, w) in out[j..j + len].iter_mut().zip(zs) {
                        *o += w * inv_h;
                    }
                }
            });
        }
    }

    /// Euclidean projection onto `{‖z‖ ≤ 1}` with the per-edge or per-cell norm.
    pub fn project(&self, z: &mut [f64]) {
        match self.mode.anisotropy {
            Anisotropy::Anisotropic => z.iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0)),
            Anisotropy::Isotropic => {
                let n = self.ext.len();
                let d = self.ext.dim();
                for i in 0..n {
                    let mut s = 0.0;
                    for k in 0..d {
                        s += z[k * n + i] * z[k * n + i];
                    }
                    if s > 1.0 {
                        let inv = 1.0 / s.sqrt();
                        for k in 0..d {
                            z[k * n + i] *= inv;
                        }
                    }
                }
            }
        }
    }

    /// `Σ φ(ξ)`: `Σ|ξ_e|` or `Σ_cells |ξ_i|_2`.
    pub fn phi_sum(&self, xi: &[f64]) -> f64 {
        match self.mode.anisotropy {
            Anisotropy::Anisotropic => xi.iter().map(|v| v.abs()).sum(),
            Anisotropy::Isotropic => self.cell_norms(xi).sum(),
        }
    }

    /// Dual norm `max φ°(z)`.
    pub fn dual_norm(&self, z: &[f64]) -> f64 {
        match self.mode.anisotropy {
            Anisotropy::Anisotropic => z.iter().fold(0.0, |m, v| m.max(v.abs())),
            Anisotropy::Isotropic => self.cell_norms(z).fold(0.0, f64::max),
        }
    }

    fn cell_norms<'a>(&'a self, xi: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        let n = self.ext.len();
        let d = self.ext.dim();
        (0..n).map(move |i| (0..d).map(|k| xi[k * n + i] * xi[k * n + i]).sum::<f64>().sqrt())
    }

    /// Squared norm bound `‖D‖² ≤ 4d/h²`.
    pub fn norm_sq_bound(&self) -> f64 {
        4.0 * self.grid.dim() as f64 / (self.grid.spacing() * self.grid.spacing())
    }

    /// `TV(u) = h^d Σ φ(D u)`.
    pub fn total_variation(&self, u: &[f64]) -> f64 {
        let mut ext = vec![0.0; self.ext_len()];
        self.lift(u, &mut ext);
        let mut z = vec![0.0; self.edge_len()];
        self.apply(&ext, &mut z);
        self.grid.cell_volume() * self.phi_sum(&z)
    }

    /// Injects an edge field from a grid with twice the spacing, cell by cell.
    pub fn prolong_from(&self, coarse: &Gradient, zc: &[f64]) -> Vec<f64> {
        let d = self.ext.dim();
        let padded = self.padded();
        let (fs, cs) = (self.ext.shape(), coarse.ext.shape());
        let map = |k: usize, j: usize| -> usize {
            if !padded {
                j / 2
            } else if j == 0 {
                0
            } else if j + 1 == fs[k] {
                cs[k] - 1
            } else {
                (j - 1) / 2 + 1
            }
        };
        let (nf, nc) = (self.ext.len(), coarse.ext.len());
        let mut out = vec![0.0; self.edge_len()];
        let mut idx = vec![0usize; d];
        for i in 0..nf {
            let ci = (0..d).fold(0, |acc, k| acc * cs[k] + map(k, idx[k]));
            for k in 0..d {
                out[k * nf + i] = zc[k * nc + ci];
            }
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < fs[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        out
    }

    /// `(Dᵀ z)` restricted to the grid.
    pub fn divergence(&self, z: &[f64]) -> Vec<f64> {
        let mut ext = vec![0.0; self.ext_len()];
        self.transpose(z, &mut ext);
        let mut out = vec![0.0; self.grid.len()];
        self.restrict(&ext, &mut out);
        out
    }
}

/// Dual edge field `z` of the total variation, `v = Dᵀ z`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField {
    grid: Grid,
    mode: PerimeterMode,
    values: Vec<f64>,
}

impl EdgeField {
    pub fn zeros(grid: &Grid, mode: PerimeterMode) -> Self {
        let len = Gradient::new(grid, mode).edge_len();
        Self { grid: grid.clone(), mode, values: vec![0.0; len] }
    }

    pub fn new(grid: &Grid, mode: PerimeterMode, values: Vec<f64>) -> Result<Self> {
        if values.len() != Gradient::new(grid, mode).edge_len() {
            return Err(Error::InvalidArgument("edge field has the wrong length".into()));
        }
        Ok(Self { grid: grid.clone(), mode, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mode(&self) -> PerimeterMode {
        self.mode
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    /// Per-edge sup norm (anisotropic) or per-cell Euclidean sup norm (isotropic).
    pub fn dual_norm(&self) -> f64 {
        Gradient::new(&self.grid, self.mode).dual_norm(&self.values)
    }

    /// Discrete divergence `v = Dᵀ z`, the subgradient represented by `z`.
    pub fn divergence(&self) -> ScalarField {
        let v = Gradient::new(&self.grid, self.mode).divergence(&self.values);
        ScalarField::new(self.grid.clone(), v).expect("divergence of a finite field is finite")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::total_variation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn modes() -> Vec<PerimeterMode> {
        let mut out = Vec::new();
        for b in [Boundary::Dirichlet, Boundary::Neumann, Boundary::Periodic] {
            out.push(PerimeterMode::anisotropic(b));
            out.push(PerimeterMode::isotropic(b));
        }
        out
    }

    #[test]
    fn transpose_is_adjoint_and_tv_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for grid in [
            Grid::new(vec![5, 7], 0.3, vec![0.0, 0.0]).unwrap(),
            Grid::new(vec![3, 4, 5], 0.5, vec![0.0; 3]).unwrap(),
            Grid::new(vec![6], 1.0, vec![0.0]).unwrap(),
        ] {
            for mode in modes() {
                let g = Gradient::new(&grid, mode);
                for _ in 0..10 {
                    let u: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let z: Vec<f64> = (0..g.edge_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let mut ext = vec![0.0; g.ext_len()];
                    g.lift(&u, &mut ext);
                    let mut du = vec![0.0; g.edge_len()];
                    g.apply(&ext, &mut du);
                    let lhs: f64 = du.iter().zip(&z).map(|(a, b)| a * b).sum();
                    let dtz = g.divergence(&z);
                    let rhs: f64 = u.iter().zip(&dtz).map(|(a, b)| a * b).sum();
                    assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()), "{mode:?}");

                    let field = ScalarField::new(grid.clone(), u.clone()).unwrap();
                    let tv = total_variation(&field, mode);
                    assert!((g.total_variation(&u) - tv).abs() < 1e-10 * (1.0 + tv), "{mode:?}");
                }
            }
        }
    }

    #[test]
    fn lift_restrict_round_trip() {
        let grid = Grid::new(vec![3, 4, 2], 1.0, vec![0.0; 3]).unwrap();
        let g = Gradient::new(&grid, PerimeterMode::anisotropic(Boundary::Dirichlet));
        let u: Vec<f64> = (0..grid.len()).map(|i| i as f64 + 1.0).collect();
        let mut ext = vec![0.0; g.ext_len()];
        g.lift(&u, &mut ext);
        assert_eq!(ext.iter().sum::<f64>(), u.iter().sum::<f64>());
        let mut back = vec![0.0; grid.len()];
        g.restrict(&ext, &mut back);
        assert_eq!(back, u);
    }

    #[test]
    fn projection_lands_in_the_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let grid = Grid::new(vec![4, 4], 1.0, vec![0.0, 0.0]).unwrap();
        for mode in modes() {
            let g = Gradient::new(&grid, mode);
            let mut z: Vec<f64> = (0..g.edge_len()).map(|_| rng.random_range(-3.0..3.0)).collect();
            g.project(&mut z);
            assert!(g.dual_norm(&z) <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn norm_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let grid = Grid::new(vec![6, 5], 0.5, vec![0.0, 0.0]).unwrap();
        for mode in modes() {
            let g = Gradient::new(&grid, mode);
            let mut x: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut est = 0.0;
            for _ in 0..300 {
                let n = x.iter().map(|a| a * a).sum::<f64>().sqrt();
                x.iter_mut().for_each(|a| *a /= n);
                let mut ext = vec![0.0; g.ext_len()];
                g.lift(&x, &mut ext);
                let mut z = vec![0.0; g.edge_len()];
                g.apply(&ext, &mut z);
                est = z.iter().map(|a| a * a).sum::<f64>();
                x = g.divergence(&z);
            }
            assert!(est <= g.norm_sq_bound() * (1.0 + 1e-12), "{mode:?} {est}");
        }
    }
}
