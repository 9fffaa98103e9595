//! Discrete sets and fields on axis-aligned `d`-dimensional lattices.
//!
//! Every field is stored row-major (last axis fastest). Cell `k` along an axis
//! has its center at `origin + h * k`, so a grid covering the box `[lo, hi]`
//! with spacing `h` starts at `lo + h / 2`.

mod distance;
pub mod io;
pub(crate) mod perimeter;

pub use distance::{distance_to_set, hausdorff_distance};
pub use perimeter::{coarea_check, level_set, perimeter, symmetric_difference_volume, total_variation, CoareaReport};

use crate::error::{ensure_finite, Error, Result};
use statrs::function::gamma::gamma;

/// Axis-aligned lattice with uniform spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    shape: Vec<usize>,
    spacing: f64,
    origin: Vec<f64>,
}

impl Grid {
    pub fn new(shape: Vec<usize>, spacing: f64, origin: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::InvalidGrid("dimension must be at least 1".into()));
        }
        if shape.contains(&0) {
            return Err(Error::InvalidGrid(format!("zero extent in shape {shape:?}")));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
        }
        if origin.len() != shape.len() {
            return Err(Error::InvalidGrid(format!(
                "origin has {} coordinates for a {}-dimensional grid",
                origin.len(),
                shape.len()
            )));
        }
        ensure_finite(&origin, "grid origin")?;
        if shape.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)).is_none() {
            return Err(Error::InvalidGrid("cell count overflows".into()));
        }
        Ok(Self { shape, spacing, origin })
    }

    /// Grid whose cells tile the box `[lo, hi]` with spacing `h`.
    ///
    /// Extents are rounded to the nearest whole number of cells.
    pub fn covering(lo: &[f64], hi: &[f64], h: f64) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::InvalidGrid("box corners differ in dimension".into()));
        }
        let mut shape = Vec::with_capacity(lo.len());
        let mut origin = Vec::with_capacity(lo.len());
        for (&a, &b) in lo.iter().zip(hi) {
            if !(b > a) {
                return Err(Error::InvalidGrid(format!("empty box side [{a}, {b}]")));
            }
            shape.push(((b - a) / h).round().max(1.0) as usize);
            origin.push(a + 0.5 * h);
        }
        Self::new(shape, h, origin)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    /// `h^(d-1)`, the measure of one cell face.
    pub fn face_area(&self) -> f64 {
        self.spacing.powi(self.dim() as i32 - 1)
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dim()];
        for k in (0..self.dim().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.shape[k + 1];
        }
        strides
    }

    pub fn index_of(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = linear % self.shape[k];
            linear /= self.shape[k];
        }
        idx
    }

    /// Center coordinates of the cell with the given linear index.
    pub fn center(&self, linear: usize) -> Vec<f64> {
        self.multi_index(linear).iter().zip(&self.origin).map(|(&i, &o)| o + self.spacing * i as f64).collect()
    }

    /// Calls `f(linear_index, center)` for every cell in storage order.
    pub fn for_each_center(&self, mut f: impl FnMut(usize, &[f64])) {
        let d = self.dim();
        let mut idx = vec![0usize; d];
        let mut x: Vec<f64> = self.origin.clone();
        for linear in 0..self.len() {
            f(linear, &x);
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < self.shape[k] {
                    x[k] = self.origin[k] + self.spacing * idx[k] as f64;
                    break;
                }
                idx[k] = 0;
                x[k] = self.origin[k];
            }
        }
    }

    /// Decomposition of storage along `axis` as `[outer][n][inner]`.
    pub(crate) fn axis_layout(&self, axis: usize) -> AxisLayout {
        let outer = self.shape[..axis].iter().product();
        let inner = self.shape[axis + 1..].iter().product();
        AxisLayout { outer, n: self.shape[axis], inner }
    }

    /// The same lattice with one extra layer of cells on every side.
    pub fn padded(&self) -> Grid {
        Grid {
            shape: self.shape.iter().map(|n| n + 2).collect(),
            spacing: self.spacing,
            origin: self.origin.iter().map(|o| o - self.spacing).collect(),
        }
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AxisLayout {
    pub outer: usize,
    pub n: usize,
    pub inner: usize,
}

impl AxisLayout {
    #[inline]
    pub fn index(&self, o: usize, j: usize, r: usize) -> usize {
        (o * self.n + j) * self.inner + r
    }
}

/// Real values on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!("{} values for a grid of {} cells", values.len(), grid.len())));
        }
        ensure_finite(&values, "scalar field")?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        let n = grid.len();
        Self { grid, values: vec![c; n] }
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let mut values = vec![0.0; grid.len()];
        grid.for_each_center(|i, x| values[i] = f(x));
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `c * 1_E`.
    pub fn from_indicator(set: &IndicatorSet, c: f64) -> Self {
        let values = set.mask.iter().map(|&b| if b { c } else { 0.0 }).collect();
        Self { grid: set.grid.clone(), values }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// `h^d Σ |u|^p` raised to `1/p`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (self.grid.cell_volume() * s).powf(1.0 / p)
    }

    pub fn l1_norm(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// `h^d Σ u v`.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self.grid.cell_volume() * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Copy of the field embedded in [`Grid::padded`] with zeros in the ghost layer.
    pub fn zero_padded(&self) -> ScalarField {
        let padded = self.grid.padded();
        let mut values = vec![0.0; padded.len()];
        for (i, &v) in self.values.iter().enumerate() {
            values[padded_index(&self.grid, &padded, i)] = v;
        }
        ScalarField { grid: padded, values }
    }
}

/// Linear index in `padded` of cell `i` of `grid`.
pub(crate) fn padded_index(grid: &Grid, padded: &Grid, i: usize) -> usize {
    let idx: Vec<usize> = grid.multi_index(i).into_iter().map(|k| k + 1).collect();
    padded.index_of(&idx)
}

/// A discrete set: one boolean per cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorSet {
    grid: Grid,
    mask: Vec<bool>,
}

// Grid holds f64 but never NaN (validated on construction).
impl Eq for Grid {}

impl IndicatorSet {
    pub fn new(grid: Grid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "mask of {} entries for a grid of {} cells",
                mask.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, mask })
    }

    pub fn empty(grid: Grid) -> Self {
        let n = grid.len();
        Self { grid, mask: vec![false; n] }
    }

    pub fn full(grid: Grid) -> Self {
        let n = grid.len();
        Self { grid, mask: vec![true; n] }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> bool) -> Self {
        let mut mask = vec![false; grid.len()];
        grid.for_each_center(|i, x| mask[i] = f(x));
        Self { grid, mask }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn mask_mut(&mut self) -> &mut [bool] {
        &mut self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    /// `h^d * #cells`.
    pub fn volume(&self) -> f64 {
        self.grid.cell_volume() * self.count() as f64
    }

    pub fn contains(&self, linear: usize) -> bool {
        self.mask[linear]
    }

    fn zip_with(&self, other: &IndicatorSet, op: impl Fn(bool, bool) -> bool) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(&a, &b)| op(a, b)).collect();
        Ok(Self { grid: self.grid.clone(), mask })
    }

    pub fn union(&self, other: &IndicatorSet) -> Result<Self> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &IndicatorSet) -> Result<Self> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &IndicatorSet) -> Result<Self> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> Self {
        Self { grid: self.grid.clone(), mask: self.mask.iter().map(|b| !b).collect() }
    }

    pub fn is_subset_of(&self, other: &IndicatorSet) -> Result<bool> {
        self.grid.check_same(&other.grid)?;
        Ok(self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b))
    }

    /// Cells of the set having at least one axis neighbour (inside the grid) outside the set.
    pub fn boundary_cells(&self) -> Vec<usize> {
        let strides = self.grid.strides();
        let shape = self.grid.shape();
        let mut out = Vec::new();
        for i in 0..self.mask.len() {
            if !self.mask[i] {
                continue;
            }
            let idx = self.grid.multi_index(i);
            let on_boundary = (0..self.grid.dim()).any(|k| {
                (idx[k] > 0 && !self.mask[i - strides[k]]) || (idx[k] + 1 < shape[k] && !self.mask[i + strides[k]])
            });
            if on_boundary {
                out.push(i);
            }
        }
        out
    }
}

/// Which perimeter/total-variation discretization to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Anisotropy {
    /// `h^(d-1)` times the sum of absolute jumps across faces.
    Anisotropic,
    /// `h^d` times the sum over cells of the Euclidean norm of the forward-difference gradient.
    Isotropic,
}

/// Treatment of the grid boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Field extended by zero; jumps to the exterior count.
    Dirichlet,
    /// Relative variation; boundary faces do not count.
    Neumann,
    /// Opposite faces of the box are identified.
    Periodic,
}

impl std::str::FromStr for Anisotropy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "anisotropic" => Ok(Anisotropy::Anisotropic),
            "isotropic" => Ok(Anisotropy::Isotropic),
            _ => Err(Error::Parse(format!("unknown tv mode {s:?}"))),
        }
    }
}

impl std::fmt::Display for Anisotropy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Anisotropy::Anisotropic => "anisotropic",
            Anisotropy::Isotropic => "isotropic",
        })
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(Boundary::Dirichlet),
            "neumann" => Ok(Boundary::Neumann),
            "periodic" => Ok(Boundary::Periodic),
            _ => Err(Error::Parse(format!("unknown boundary {s:?}"))),
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Neumann => "neumann",
            Boundary::Periodic => "periodic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PerimeterMode {
    pub anisotropy: Anisotropy,
    pub boundary: Boundary,
}

impl PerimeterMode {
    pub const fn new(anisotropy: Anisotropy, boundary: Boundary) -> Self {
        Self { anisotropy, boundary }
    }

    pub const fn anisotropic(boundary: Boundary) -> Self {
        Self::new(Anisotropy::Anisotropic, boundary)
    }

    pub const fn isotropic(boundary: Boundary) -> Self {
        Self::new(Anisotropy::Isotropic, boundary)
    }
}

/// Volume of the Euclidean unit ball in `R^d`, `π^(d/2) / Γ(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    std::f64::consts::PI.powf(half) / gamma(half + 1.0)
}

/// Isoperimetric constant `Θ_d = d ω_d^(1/d)`.
pub fn isoperimetric_constant(d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    Ok(d as f64 * unit_ball_volume(d).powf(1.0 / d as f64))
}

/// Cells whose centers lie within distance `r` of `center`.
pub fn ball_indicator(grid: &Grid, center: &[f64], r: f64) -> Result<IndicatorSet> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("ball radius must be positive, got {r}")));
    }
    if center.len() != grid.dim() {
        return Err(Error::InvalidArgument("ball center has the wrong dimension".into()));
    }
    let r2 = r * r;
    Ok(IndicatorSet::from_fn(grid.clone(), |x| x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= r2))
}
