//! Dinic max-flow on real capacities.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub(crate) struct FlowGraph {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    eps: f64,
}

impl FlowGraph {
    pub fn new(nodes: usize) -> Self {
        Self { head: vec![Vec::new(); nodes], to: Vec::new(), cap: Vec::new(), eps: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.head.len()
    }

    /// Adds `u → v` with capacity `c` and `v → u` with capacity `c_rev`.
    pub fn add_edge(&mut self, u: usize, v: usize, c: f64, c_rev: f64) {
        let e = self.to.len();
        self.to.push(v);
        self.cap.push(c);
        self.to.push(u);
        self.cap.push(c_rev);
        self.head[u].push(e);
        self.head[v].push(e + 1);
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<u32>> {
        let mut level = vec![u32::MAX; self.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > self.eps && level[v] == u32::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        (level[t] != u32::MAX).then_some(level)
    }

    /// Pushes blocking flow along shortest paths; iterative DFS.
    fn blocking_flow(&mut self, s: usize, t: usize, level: &[u32]) -> f64 {
        let mut next = vec![0usize; self.len()];
        let mut total = 0.0;
        let mut path: Vec<usize> = Vec::new();
        loop {
            let u = path.last().map_or(s, |&e| self.to[e]);
            if u == t {
                let push = path.iter().map(|&e| self.cap[e]).fold(f64::INFINITY, f64::min);
                for &e in &path {
                    self.cap[e] -= push;
                    self.cap[e ^ 1] += push;
                }
                total += push;
                // Restart from the tail of the first saturated edge.
                let cut = path.iter().position(|&e| self.cap[e] <= self.eps).unwrap_or(0);
                path.truncate(cut);
                continue;
            }
            let mut advanced = false;
            while next[u] < self.head[u].len() {
                let e = self.head[u][next[u]];
                let v = self.to[e];
                if self.cap[e] > self.eps && level[v] == level[u] + 1 {
                    path.push(e);
                    advanced = true;
                    break;
                }
                next[u] += 1;
            }
            if !advanced {
                if u == s {
                    break;
                }
                // Dead end: retreat and skip this edge from the parent.
                path.pop();
                let parent = path.last().map_or(s, |&e| self.to[e]);
                next[parent] += 1;
            }
        }
        total
    }

    /// Maximum flow value from `s` to `t`. Capacities below `eps` count as saturated.
    pub fn max_flow(&mut self, s: usize, t: usize, eps: f64) -> f64 {
        self.eps = eps;
        let mut flow = 0.0;
        while let Some(level) = self.levels(s, t) {
            flow += self.blocking_flow(s, t, &level);
        }
        flow
    }

    /// Nodes from which `t` is reachable in the residual graph.
    pub fn reaches_sink(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        seen[t] = true;
        let mut queue = VecDeque::from([t]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.head[v] {
                // `e` runs v → u; its partner u → v carries the residual we need.
                let u = self.to[e];
                if !seen[u] && self.cap[e ^ 1] > self.eps {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_network() {
        // CLRS example, max flow 23.
        let mut g = FlowGraph::new(6);
        for (u, v, c) in [
            (0, 1, 16.0),
            (0, 2, 13.0),
            (2, 1, 4.0),
            (1, 3, 12.0),
            (3, 2, 9.0),
            (2, 4, 14.0),
            (4, 3, 7.0),
            (3, 5, 20.0),
            (4, 5, 4.0),
        ] {
            g.add_edge(u, v, c, 0.0);
        }
        assert!((g.max_flow(0, 5, 1e-12) - 23.0).abs() < 1e-12);
        let reach = g.reaches_sink(5);
        assert!(!reach[0]);
        assert!(reach[5]);
    }

    #[test]
    fn long_chain_does_not_recurse() {
        let n = 200_000;
        let mut g = FlowGraph::new(n);
        for i in 0..n - 1 {
            g.add_edge(i, i + 1, 1.0 + (i % 7) as f64, 0.0);
        }
        assert_eq!(g.max_flow(0, n - 1, 1e-12), 1.0);
    }
}
