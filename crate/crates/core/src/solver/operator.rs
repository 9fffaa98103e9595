use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_finite, Error, Result};
use crate::grid::{Grid, ScalarField};

/// A linear map between flat vectors with its plain (unweighted) transpose.
pub trait LinearMap: Send + Sync {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    fn apply(&self, x: &[f64], out: &mut [f64]);
    fn transpose(&self, y: &[f64], out: &mut [f64]);
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!("matrix data of length {} is not {rows}x{cols}", data.len())));
        }
        ensure_finite(&data, "matrix entries")?;
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

impl LinearMap for DenseMatrix {
    fn input_len(&self) -> usize {
        self.cols
    }

    fn output_len(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (row, o) in self.data.chunks_exact(self.cols).zip(out.iter_mut()) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn transpose(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (row, yi) in self.data.chunks_exact(self.cols).zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Identity,
    Matrix,
    Custom,
}

/// Forward operator `A: L^q(grid) → Y`.
///
/// Fields carry the `h^d`-weighted pairing. `Y` is the same weighted space for
/// the identity and plain `R^m` for matrices and custom maps, so
/// `A* y = Mᵀ y / h^d` in those cases.
#[derive(Clone)]
pub enum ForwardOperator {
    Identity { grid: Grid },
    Matrix { grid: Grid, matrix: DenseMatrix, opnorm_bound: f64 },
    Custom { grid: Grid, map: Arc<dyn LinearMap>, opnorm_bound: f64 },
}

impl fmt::Debug for ForwardOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ForwardOperator")
            .field("kind", &self.kind())
            .field("data_len", &self.data_len())
            .field("opnorm_bound", &self.opnorm_bound())
            .finish()
    }
}

impl ForwardOperator {
    pub fn identity(grid: Grid) -> Self {
        ForwardOperator::Identity { grid }
    }

    /// Matrix with `grid.len()` columns. The norm bound is the smaller of the
    /// Frobenius norm and a padded power-iteration estimate.
    pub fn matrix(grid: Grid, matrix: DenseMatrix) -> Result<Self> {
        if matrix.cols() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "matrix has {} columns for a grid of {} cells",
                matrix.cols(),
                grid.len()
            )));
        }
        let plain = power_iteration(&matrix, 200, 7);
        let bound = (1.01 * plain).min(matrix.frobenius_norm()) / grid.cell_volume().sqrt();
        Ok(ForwardOperator::Matrix { grid, matrix, opnorm_bound: bound })
    }

    /// Custom map; `opnorm_bound` is in the weighted norms and is checked
    /// against a power-iteration estimate.
    pub fn custom(grid: Grid, map: Arc<dyn LinearMap>, opnorm_bound: f64) -> Result<Self> {
        if map.input_len() != grid.len() {
            return Err(Error::InvalidArgument("custom operator input length differs from the grid".into()));
        }
        let est = power_iteration(map.as_ref(), 200, 7) / grid.cell_volume().sqrt();
        if !(opnorm_bound >= est * (1.0 - 1e-6)) {
            return Err(Error::InvalidArgument(format!("operator norm bound {opnorm_bound} below estimate {est}")));
        }
        Ok(ForwardOperator::Custom { grid, map, opnorm_bound })
    }

    pub fn kind(&self) -> OperatorKind {
        match self {
            ForwardOperator::Identity { .. } => OperatorKind::Identity,
            ForwardOperator::Matrix { .. } => OperatorKind::Matrix,
            ForwardOperator::Custom { .. } => OperatorKind::Custom,
        }
    }

    pub fn grid(&self) -> &Grid {
        match self {
            ForwardOperator::Identity { grid }
            | ForwardOperator::Matrix { grid, .. }
            | ForwardOperator::Custom { grid, .. } => grid,
        }
    }

    pub fn data_len(&self) -> usize {
        match self {
            ForwardOperator::Identity { grid } => grid.len(),
            ForwardOperator::Matrix { matrix, .. } => matrix.rows(),
            ForwardOperator::Custom { map, .. } => map.output_len(),
        }
    }

    /// Weight of each entry in the pairing of `Y`.
    pub fn data_weight(&self) -> f64 {
        match self {
            ForwardOperator::Identity { grid } => grid.cell_volume(),
            _ => 1.0,
        }
    }

    /// Upper bound on `‖A‖ = ‖A*‖` in the weighted norms.
    pub fn opnorm_bound(&self) -> f64 {
        match self {
            ForwardOperator::Identity { .. } => 1.0,
            ForwardOperator::Matrix { opnorm_bound, .. } | ForwardOperator::Custom { opnorm_bound, .. } => {
                *opnorm_bound
            }
        }
    }

    pub(crate) fn linear_map(&self) -> Option<&dyn LinearMap> {
        match self {
            ForwardOperator::Identity { .. } => None,
            ForwardOperator::Matrix { matrix, .. } => Some(matrix),
            ForwardOperator::Custom { map, .. } => Some(map.as_ref()),
        }
    }

    pub fn apply_raw(&self, u: &[f64]) -> Vec<f64> {
        match self.linear_map() {
            None => u.to_vec(),
            Some(m) => {
                let mut out = vec![0.0; m.output_len()];
                m.apply(u, &mut out);
                out
            }
        }
    }

    pub fn apply(&self, u: &ScalarField) -> Result<Vec<f64>> {
        self.grid().check_same(u.grid())?;
        Ok(self.apply_raw(u.values()))
    }

    pub fn adjoint_raw(&self, y: &[f64]) -> Vec<f64> {
        match self.linear_map() {
            None => y.to_vec(),
            Some(m) => {
                let mut out = vec![0.0; m.input_len()];
                m.transpose(y, &mut out);
                let inv = 1.0 / self.grid().cell_volume();
                out.iter_mut().for_each(|o| *o *= inv);
                out
            }
        }
    }

    pub fn adjoint(&self, y: &[f64]) -> Result<ScalarField> {
        if y.len() != self.data_len() {
            return Err(Error::InvalidArgument("data vector has the wrong length".into()));
        }
        ScalarField::new(self.grid().clone(), self.adjoint_raw(y))
    }

    /// `Σ w_Y a_i b_i`.
    pub fn data_pairing(&self, a: &[f64], b: &[f64]) -> f64 {
        self.data_weight() * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    }

    /// Largest relative defect of `⟨Au, y⟩_Y = ⟨u, A*y⟩` over random pairs.
    pub fn adjoint_defect(&self, pairs: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.grid().len();
        let m = self.data_len();
        let w = self.grid().cell_volume();
        let mut worst: f64 = 0.0;
        for _ in 0..pairs {
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let lhs = self.data_pairing(&self.apply_raw(&u), &y);
            let rhs = w * u.iter().zip(self.adjoint_raw(&y)).map(|(a, b)| a * b).sum::<f64>();
            worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs())));
        }
        worst
    }

    /// Power-iteration estimate of `‖A‖` in the weighted norms.
    pub fn opnorm_estimate(&self, iterations: usize, seed: u64) -> f64 {
        match self.linear_map() {
            None => 1.0,
            Some(m) => power_iteration(m, iterations, seed) / self.grid().cell_volume().sqrt(),
        }
    }
}

/// Plain spectral norm estimate by power iteration on `MᵀM`.
fn power_iteration(map: &dyn LinearMap, iterations: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..map.input_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut y = vec![0.0; map.output_len()];
    let mut est = 0.0;
    for _ in 0..iterations {
        let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|a| *a /= nx);
        map.apply(&x, &mut y);
        est = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        map.transpose(&y, &mut x);
    }
    est
}
