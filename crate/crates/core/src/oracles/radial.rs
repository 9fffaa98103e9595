use crate::error::{Error, Result};
use crate::grid::unit_ball_volume;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialKind {
    Ball { r: f64 },
    Annulus { r1: f64, r2: f64 },
}

/// A ball or annulus centered at `center` in `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSet {
    pub kind: RadialKind,
    pub center: Vec<f64>,
    pub dim: usize,
}

impl RadialSet {
    pub fn ball(dim: usize, center: Vec<f64>, r: f64) -> Result<Self> {
        Self::new(RadialKind::Ball { r }, center, dim)
    }

    pub fn annulus(dim: usize, center: Vec<f64>, r1: f64, r2: f64) -> Result<Self> {
        Self::new(RadialKind::Annulus { r1, r2 }, center, dim)
    }

    fn new(kind: RadialKind, center: Vec<f64>, dim: usize) -> Result<Self> {
        if dim < 2 || center.len() != dim {
            return Err(Error::InvalidArgument("radial sets need d >= 2 and a center in R^d".into()));
        }
        let ok = match kind {
            RadialKind::Ball { r } => r > 0.0 && r.is_finite(),
            RadialKind::Annulus { r1, r2 } => r1 > 0.0 && r2 > r1 && r2.is_finite(),
        };
        if !ok {
            return Err(Error::InvalidArgument(format!("invalid radii {kind:?}")));
        }
        Ok(Self { kind, center, dim })
    }

    pub fn inner(&self) -> f64 {
        match self.kind {
            RadialKind::Ball { .. } => 0.0,
            RadialKind::Annulus { r1, .. } => r1,
        }
    }

    pub fn outer(&self) -> f64 {
        match self.kind {
            RadialKind::Ball { r } => r,
            RadialKind::Annulus { r2, .. } => r2,
        }
    }

    pub fn contains_radius(&self, r: f64) -> bool {
        r >= self.inner() && r <= self.outer()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Number of radial nodes in the dense search.
    pub nodes: usize,
    /// Bisection accuracy for the first transition.
    pub transition_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { nodes: 400, transition_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialSweep {
    pub lambdas: Vec<f64>,
    /// `Some((ra, rb))` for the shell `ra ≤ |x| ≤ rb` (a ball when `ra = 0`), `None` for `∅`.
    pub minimizers: Vec<Option<(f64, f64)>>,
    pub energies: Vec<f64>,
    pub radii: Vec<f64>,
    /// `λ h(r)` at the first `λ` whose minimizer contains `r`; `None` if never reached.
    pub kappa: Vec<Option<f64>>,
    /// Smallest `λ` with a nonempty minimizer, refined by bisection.
    pub transition: Option<f64>,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, 8 points.
const GL_X: [f64; 4] = [0.1834346424956498, 0.525532409916329, 0.7966664774136267, 0.9602898564975363];
const GL_W: [f64; 4] = [0.362683783378362, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];

struct Family<'a> {
    dim: usize,
    sphere: f64,
    h: &'a dyn Fn(f64) -> f64,
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl<'a> Family<'a> {
    fn new(set: &RadialSet, h: &'a dyn Fn(f64) -> f64, n: usize) -> Self {
        let (a, b) = (set.inner(), set.outer());
        let nodes: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        let mut fam =
            Family { dim: set.dim, sphere: set.dim as f64 * unit_ball_volume(set.dim), h, nodes, cumulative: vec![] };
        let mut cumulative = vec![0.0];
        for w in fam.nodes.windows(2) {
            let last = *cumulative.last().unwrap();
            cumulative.push(last + fam.shell_mass(w[0], w[1]));
        }
        fam.cumulative = cumulative;
        fam
    }

    /// `∫_{ra ≤ |x| ≤ rb} h`.
    fn shell_mass(&self, ra: f64, rb: f64) -> f64 {
        let (m, c) = (0.5 * (ra + rb), 0.5 * (rb - ra));
        let mut s = 0.0;
        for (x, w) in GL_X.iter().zip(GL_W) {
            for r in [m - c * x, m + c * x] {
                s += w * (self.h)(r) * r.powi(self.dim as i32 - 1);
            }
        }
        self.sphere * c * s
    }

    fn perimeter(&self, ra: f64, rb: f64) -> f64 {
        let p = self.dim as i32 - 1;
        self.sphere * (if ra > 0.0 { ra.powi(p) } else { 0.0 } + rb.powi(p))
    }

    fn node_energy(&self, i: usize, j: usize, lambda: f64) -> f64 {
        self.perimeter(self.nodes[i], self.nodes[j]) - lambda * (self.cumulative[j] - self.cumulative[i])
    }

    fn energy(&self, ra: f64, rb: f64, lambda: f64) -> f64 {
        self.perimeter(ra, rb) - lambda * self.shell_mass(ra, rb)
    }

    fn best_node_pair(&self, lambda: f64) -> (f64, usize, usize) {
        let n = self.nodes.len();
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..n {
            for j in i + 1..n {
                let e = self.node_energy(i, j, lambda);
                if e < best.0 {
                    best = (e, i, j);
                }
            }
        }
        best
    }

    fn tie(&self) -> f64 {
        1e-12 * self.perimeter(0.0, *self.nodes.last().unwrap())
    }

    /// Minimizer among `∅` and the shells, `∅` winning ties.
    fn minimize(&self, lambda: f64) -> (f64, Option<(f64, f64)>) {
        let (e, i, j) = self.best_node_pair(lambda);
        if !(e < -self.tie()) {
            return (0.0, None);
        }
        let n = self.nodes.len() - 1;
        let lo_a = self.nodes[i.saturating_sub(1)];
        let hi_a = self.nodes[(i + 1).min(n)];
        let lo_b = self.nodes[j.saturating_sub(1)];
        let hi_b = self.nodes[(j + 1).min(n)];
        let (mut ra, mut rb, mut best) = (self.nodes[i], self.nodes[j], e);
        // Refinements must beat rounding noise to replace a node pair.
        let noise = 1e-3 * self.tie();
        for _ in 0..4 {
            let a = golden_min(|x| self.energy(x, rb.max(x), lambda), lo_a, hi_a.min(rb));
            if self.energy(a, rb, lambda) < best - noise {
                ra = a;
                best = self.energy(a, rb, lambda);
            }
            let b = golden_min(|x| self.energy(ra, x, lambda), lo_b.max(ra), hi_b);
            if self.energy(ra, b, lambda) < best - noise {
                rb = b;
                best = self.energy(ra, b, lambda);
            }
        }
        (best, Some((ra, rb)))
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    if hi <= lo {
        return lo;
    }
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Variational-curvature sweep restricted to the radial subsets of `set`.
///
/// For each `λ` (in increasing order) `F ↦ Per(F) − λ ∫_F h` is minimized over
/// `∅` and all balls/shells inside `set` by a dense search on `opts.nodes` radii
/// followed by golden-section refinement. Consecutive minimizers must be nested.
pub fn lambda_sweep_radial(
    set: &RadialSet,
    h: &dyn Fn(f64) -> f64,
    lambdas: &[f64],
    radii: &[f64],
    opts: SweepOptions,
) -> Result<RadialSweep> {
    if lambdas.is_empty() || lambdas.windows(2).any(|w| w[1] <= w[0]) || lambdas[0] < 0.0 {
        return Err(Error::InvalidArgument("λ grid must be nonnegative and increasing".into()));
    }
    if opts.nodes < 2 {
        return Err(Error::InvalidArgument("radial search needs at least two nodes".into()));
    }
    if let Some(r) = radii.iter().find(|r| !set.contains_radius(**r)) {
        return Err(Error::InvalidArgument(format!("radius {r} outside the radial set")));
    }
    let fam = Family::new(set, h, opts.nodes);
    let slack = 1.5 * (set.outer() - set.inner()) / opts.nodes as f64;
    let mut minimizers = Vec::with_capacity(lambdas.len());
    let mut energies = Vec::with_capacity(lambdas.len());
    let mut prev: Option<(f64, f64)> = None;
    for &lambda in lambdas {
        let (e, m) = fam.minimize(lambda);
        match (prev, m) {
            (Some(_), None) => {
                return Err(Error::NestingViolation(format!("minimizer vanished at λ = {lambda}")));
            }
            (Some((a0, b0)), Some((a1, b1))) if a1 > a0 + slack || b1 < b0 - slack => {
                return Err(Error::NestingViolation(format!(
                    "shell [{a0}, {b0}] not inside [{a1}, {b1}] at λ = {lambda}"
                )));
            }
            _ => {}
        }
        if m.is_some() {
            prev = m;
        }
        minimizers.push(m);
        energies.push(e);
    }
    let first = minimizers.iter().position(Option::is_some);
    let transition = first.map(|k| {
        let nonempty = |l: f64| fam.best_node_pair(l).0 < -fam.tie();
        let mut lo = if k == 0 { 0.0 } else { lambdas[k - 1] };
        let mut hi = lambdas[k];
        while hi - lo > opts.transition_tol * (1.0 + hi) {
            let mid = 0.5 * (lo + hi);
            if nonempty(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    });
    let kappa = radii
        .iter()
        .map(|&r| {
            minimizers
                .iter()
                .zip(lambdas)
                .find(|(m, _)| matches!(m, Some((a, b)) if *a <= r && r <= *b))
                .map(|(_, l)| l * h(r))
        })
        .collect();
    Ok(RadialSweep { lambdas: lambdas.to_vec(), minimizers, energies, radii: radii.to_vec(), kappa, transition })
}
