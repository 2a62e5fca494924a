//! Unit-capacity max-flow on the vertex-split network of an undirected graph.
//!
//! Vertex `v` becomes `in(v) -> out(v)` with capacity one and every edge
//! `{a, b}` becomes the arcs `out(a) -> in(b)` and `out(b) -> in(a)`, whose
//! capacity two keeps them out of every minimum cut. A flow
//! from `out(s)` to `in(t)` is then a family of internally vertex-disjoint
//! `s`-`t` paths, so by Menger the max flow is the local connectivity.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::UGraph;

const NONE: usize = usize::MAX;

/// Residual network reused across queries on the same graph.
#[derive(Debug, Clone)]
pub struct SplitNetwork {
    vertices: usize,
    start: Vec<usize>,
    to: Vec<usize>,
    rev: Vec<usize>,
    cap: Vec<u8>,
    forward: Vec<bool>,
    residual: Vec<u8>,
    parent_arc: Vec<usize>,
    reached: Vec<bool>,
}

fn node_in(v: usize) -> usize {
    2 * v
}

fn node_out(v: usize) -> usize {
    2 * v + 1
}

impl SplitNetwork {
    pub fn new(graph: &UGraph) -> Self {
        let vertices = graph.vertex_count();
        let nodes = 2 * vertices;
        // (from, to, capacity) for every forward arc.
        let mut arcs: Vec<(usize, usize, u8)> = Vec::with_capacity(vertices + 2 * graph.edge_count());
        for v in 0..vertices {
            arcs.push((node_in(v), node_out(v), 1));
            for &w in graph.neighbors(v) {
                arcs.push((node_out(v), node_in(w), 2));
            }
        }
        let mut count = vec![0usize; nodes + 1];
        for &(a, b, _) in &arcs {
            count[a] += 1;
            count[b] += 1;
        }
        let mut start = vec![0usize; nodes + 1];
        for k in 0..nodes {
            start[k + 1] = start[k] + count[k];
        }
        let total = start[nodes];
        let mut fill = start.clone();
        let mut to = vec![0; total];
        let mut rev = vec![0; total];
        let mut cap = vec![0u8; total];
        let mut forward = vec![false; total];
        for &(a, b, c) in &arcs {
            let fa = fill[a];
            let fb = fill[b];
            fill[a] += 1;
            fill[b] += 1;
            to[fa] = b;
            rev[fa] = fb;
            cap[fa] = c;
            forward[fa] = true;
            to[fb] = a;
            rev[fb] = fa;
        }
        Self {
            vertices,
            start,
            to,
            rev,
            residual: cap.clone(),
            cap,
            forward,
            parent_arc: vec![NONE; nodes],
            reached: vec![false; nodes],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    /// Number of internally vertex-disjoint `s`-`t` paths, stopping early
    /// once `limit` paths are found. `s` and `t` must differ and should not
    /// be adjacent (a direct edge counts as one path with no interior).
    pub fn max_flow(&mut self, s: usize, t: usize, limit: usize) -> usize {
        debug_assert!(s != t);
        self.residual.copy_from_slice(&self.cap);
        let (source, sink) = (node_out(s), node_in(t));
        let mut flow = 0;
        while flow < limit {
            if !self.augmenting_search(source, sink) {
                break;
            }
            let mut node = sink;
            while node != source {
                let arc = self.parent_arc[node];
                self.residual[arc] -= 1;
                self.residual[self.rev[arc]] += 1;
                node = self.to[self.rev[arc]];
            }
            flow += 1;
        }
        flow
    }

    /// BFS in the residual network; records parents and the reached set.
    fn augmenting_search(&mut self, source: usize, sink: usize) -> bool {
        self.reached.fill(false);
        self.reached[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(a) = queue.pop_front() {
            for arc in self.start[a]..self.start[a + 1] {
                let b = self.to[arc];
                if self.residual[arc] > 0 && !self.reached[b] {
                    self.reached[b] = true;
                    self.parent_arc[b] = arc;
                    if b == sink {
                        return true;
                    }
                    queue.push_back(b);
                }
            }
        }
        false
    }

    /// Maximum flow together with a minimum vertex cut separating `s` from
    /// `t`: the vertices whose `in` node is reachable in the final residual
    /// network but whose `out` node is not.
    pub fn min_vertex_cut(&mut self, s: usize, t: usize) -> (usize, Vec<usize>) {
        let flow = self.max_flow(s, t, usize::MAX);
        let cut = (0..self.vertices)
            .filter(|&v| v != s && v != t)
            .filter(|&v| self.reached[node_in(v)] && !self.reached[node_out(v)])
            .collect::<Vec<_>>();
        debug_assert_eq!(cut.len(), flow);
        (flow, cut)
    }

    /// Decomposes the current flow into vertex sequences `s, ..., t`. Valid
    /// right after [`max_flow`](Self::max_flow) or
    /// [`min_vertex_cut`](Self::min_vertex_cut).
    pub fn flow_paths(&self, s: usize, t: usize) -> Vec<Vec<usize>> {
        let mut used = vec![false; self.residual.len()];
        let mut paths = Vec::new();
        let source = node_out(s);
        for first in self.start[source]..self.start[source + 1] {
            if !self.carries_flow(first) || used[first] {
                continue;
            }
            used[first] = true;
            let mut path = vec![s];
            let mut node = self.to[first];
            // node is always some in(v); step through out(v) to the next in.
            loop {
                let v = node / 2;
                path.push(v);
                if v == t {
                    break;
                }
                let out = node_out(v);
                let next = (self.start[out]..self.start[out + 1])
                    .find(|&arc| self.carries_flow(arc) && !used[arc])
                    .expect("flow is conserved");
                used[next] = true;
                node = self.to[next];
            }
            paths.push(path);
        }
        paths
    }

    fn carries_flow(&self, arc: usize) -> bool {
        self.forward[arc] && self.residual[arc] < self.cap[arc]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_has_two_paths() {
        let c4 = UGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let mut net = SplitNetwork::new(&c4);
        assert_eq!(net.max_flow(0, 2, usize::MAX), 2);
        assert_eq!(net.max_flow(0, 2, 1), 1);
        let (flow, cut) = net.min_vertex_cut(0, 2);
        assert_eq!(flow, 2);
        assert_eq!(cut, vec![1, 3]);
        let mut paths = net.flow_paths(0, 2);
        paths.sort();
        assert_eq!(paths, vec![vec![0, 1, 2], vec![0, 3, 2]]);
    }

    #[test]
    fn path_graph_has_one() {
        let p = UGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let mut net = SplitNetwork::new(&p);
        assert_eq!(net.min_vertex_cut(0, 2), (1, vec![1]));
    }

    #[test]
    fn disconnected_pair_has_none() {
        let g = UGraph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let mut net = SplitNetwork::new(&g);
        assert_eq!(net.min_vertex_cut(0, 3), (0, vec![]));
    }
}
