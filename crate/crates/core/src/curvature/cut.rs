use super::maxflow::FlowGraph;
use crate::error::{Error, Result};
use crate::grid::perimeter::for_each_forward_pair;
use crate::grid::{perimeter, Anisotropy, Boundary, Grid, IndicatorSet, PerimeterMode, ScalarField};

/// Minimize `Per(F) − ∫_F g` over sets `superset_of ⊆ F ⊆ subset_of`.
#[derive(Debug, Clone)]
pub struct CutProblem {
    pub g: ScalarField,
    pub mode: PerimeterMode,
    pub subset_of: Option<IndicatorSet>,
    pub superset_of: Option<IndicatorSet>,
}

impl CutProblem {
    pub fn new(g: ScalarField, boundary: Boundary) -> Self {
        Self { g, mode: PerimeterMode::anisotropic(boundary), subset_of: None, superset_of: None }
    }

    pub fn within(mut self, outer: IndicatorSet) -> Self {
        self.subset_of = Some(outer);
        self
    }

    pub fn containing(mut self, inner: IndicatorSet) -> Self {
        self.superset_of = Some(inner);
        self
    }

    pub fn grid(&self) -> &Grid {
        self.g.grid()
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode.anisotropy != Anisotropy::Anisotropic {
            return Err(Error::RequiresAnisotropic("min-cut minimization"));
        }
        for c in [&self.subset_of, &self.superset_of].into_iter().flatten() {
            self.grid().check_same(c.grid())?;
        }
        if let (Some(outer), Some(inner)) = (&self.subset_of, &self.superset_of) {
            if !inner.is_subset_of(outer)? {
                return Err(Error::Infeasible("lower bound set is not contained in the upper bound set".into()));
            }
        }
        Ok(())
    }

    /// `Per(F) − h^d Σ_F g`.
    pub fn energy(&self, set: &IndicatorSet) -> Result<f64> {
        self.grid().check_same(set.grid())?;
        Ok(cut_energy(set, &self.g, self.mode.boundary))
    }
}

pub(crate) fn cut_energy(set: &IndicatorSet, g: &ScalarField, boundary: Boundary) -> f64 {
    let mass: f64 = set.mask().iter().zip(g.values()).filter(|(m, _)| **m).map(|(_, v)| v).sum();
    perimeter(set, PerimeterMode::anisotropic(boundary)) - set.grid().cell_volume() * mass
}

#[derive(Debug, Clone)]
pub struct CutResult {
    /// The largest minimizer.
    pub set: IndicatorSet,
    pub energy: f64,
    pub flow: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Node {
    In,
    Out,
    Free(usize),
}

/// Exact minimizer by a source/sink graph cut.
///
/// Source side is `F`. Each face carries `h^(d−1)` in both directions, cell `i`
/// gets `h^d g⁺` from the source and `h^d g⁻` to the sink, and under Dirichlet
/// conditions every exterior face of `i` adds `h^(d−1)` to the sink edge.
/// Cells fixed by the constraints are contracted into the terminals. Among all
/// minimizers the union of all of them is returned: the cells that cannot reach
/// the sink in the final residual graph.
pub fn min_cut_geometric(prob: &CutProblem) -> Result<CutResult> {
    prob.validate()?;
    let grid = prob.grid();
    let n = grid.len();
    let hd = grid.cell_volume();
    let face = grid.face_area();
    let boundary = prob.mode.boundary;

    let mut nodes = Vec::with_capacity(n);
    let mut free = 0usize;
    for i in 0..n {
        let forced_in = prob.superset_of.as_ref().is_some_and(|s| s.contains(i));
        let forced_out = prob.subset_of.as_ref().is_some_and(|s| !s.contains(i));
        nodes.push(if forced_in {
            Node::In
        } else if forced_out {
            Node::Out
        } else {
            free += 1;
            Node::Free(free - 1)
        });
    }

    let (src, sink) = (free, free + 1);
    let mut to_source = vec![0.0; free];
    let mut to_sink = vec![0.0; free];
    for (i, node) in nodes.iter().enumerate() {
        if let Node::Free(k) = *node {
            let g = prob.g.values()[i];
            if g > 0.0 {
                to_source[k] += hd * g;
            } else {
                to_sink[k] -= hd * g;
            }
        }
    }
    let mut graph = FlowGraph::new(free + 2);
    let periodic = boundary == Boundary::Periodic;
    for axis in 0..grid.dim() {
        for_each_forward_pair(grid, axis, periodic, |i, j| match (nodes[i], nodes[j]) {
            (Node::Free(a), Node::Free(b)) => graph.add_edge(a, b, face, face),
            (Node::Free(a), Node::In) | (Node::In, Node::Free(a)) => to_source[a] += face,
            (Node::Free(a), Node::Out) | (Node::Out, Node::Free(a)) => to_sink[a] += face,
            _ => {}
        });
        if boundary == Boundary::Dirichlet {
            let lay = grid.axis_layout(axis);
            for o in 0..lay.outer {
                for r in 0..lay.inner {
                    for j in [0, lay.n - 1] {
                        if let Node::Free(a) = nodes[lay.index(o, j, r)] {
                            to_sink[a] += face;
                        }
                    }
                }
            }
        }
    }
    let mut scale: f64 = face;
    for k in 0..free {
        scale = scale.max(to_source[k]).max(to_sink[k]);
        if to_source[k] > 0.0 {
            graph.add_edge(src, k, to_source[k], 0.0);
        }
        if to_sink[k] > 0.0 {
            graph.add_edge(k, sink, to_sink[k], 0.0);
        }
    }
    let flow = graph.max_flow(src, sink, 1e-13 * scale);
    let reach = graph.reaches_sink(sink);

    let mask = nodes
        .iter()
        .map(|node| match *node {
            Node::In => true,
            Node::Out => false,
            Node::Free(k) => !reach[k],
        })
        .collect();
    let set = IndicatorSet::new(grid.clone(), mask)?;
    let energy = cut_energy(&set, &prob.g, boundary);
    Ok(CutResult { set, energy, flow })
}
