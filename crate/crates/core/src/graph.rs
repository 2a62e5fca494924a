//! Fiber graphs as explicit adjacency structures, and their orientation by
//! a weight vector.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::enumerate::Fiber;
use crate::table::{enumerate_basis_moves, ContingencyTable, MarkovMove};
use crate::{Error, Result};

/// A simple undirected graph on vertices `0..n` with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UGraph {
    adj: Vec<Vec<usize>>,
}

impl UGraph {
    /// Builds a graph from an edge list; self-loops and repeated edges are
    /// dropped.
    pub fn from_edges(vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); vertices];
        for (u, v) in edges {
            if u >= vertices {
                return Err(Error::VertexOutOfRange(u));
            }
            if v >= vertices {
                return Err(Error::VertexOutOfRange(v));
            }
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { adj })
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn is_complete(&self) -> bool {
        let n = self.vertex_count();
        self.adj.iter().all(|list| list.len() + 1 == n)
    }

    /// Connectivity of the graph with `removed` vertices deleted. The empty
    /// graph counts as connected.
    pub fn is_connected_without(&self, removed: &[bool]) -> bool {
        let Some(start) = (0..self.vertex_count()).find(|&v| !removed[v]) else {
            return true;
        };
        let mut seen = removed.to_vec();
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn is_connected(&self) -> bool {
        self.is_connected_without(&vec![false; self.vertex_count()])
    }
}

/// One adjacency entry of a fiber graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiberEdge {
    pub target: usize,
    /// Least move (canonical order) taking the source to `target`.
    pub label: MarkovMove,
    /// Number of distinct basis moves taking the source to `target`.
    pub multiplicity: u32,
}

/// `G(n, r)`: the fiber together with its move-labelled adjacency.
#[derive(Debug, Clone)]
pub struct FiberGraph {
    fiber: Fiber,
    graph: UGraph,
    labels: Vec<Vec<FiberEdge>>,
}

impl FiberGraph {
    pub fn fiber(&self) -> &Fiber {
        &self.fiber
    }

    /// The underlying simple graph.
    pub fn graph(&self) -> &UGraph {
        &self.graph
    }

    /// Adjacency entries of `v`, sorted by target.
    pub fn edges_of(&self, v: usize) -> &[FiberEdge] {
        &self.labels[v]
    }

    /// The edge from `u` to `v`, if present.
    pub fn edge(&self, u: usize, v: usize) -> Option<&FiberEdge> {
        let list = &self.labels[u];
        list.binary_search_by_key(&v, |e| e.target).ok().map(|k| &list[k])
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn table(&self, v: usize) -> ContingencyTable {
        self.fiber.table(v)
    }
}

/// Builds `G(n, r)` over an enumerated fiber by applying every basis move to
/// every vertex and looking the result up in the fiber index.
pub fn build_graph(fiber: Fiber) -> FiberGraph {
    let n = fiber.n();
    let moves = if n >= 2 { enumerate_basis_moves(n).expect("n >= 2") } else { Vec::new() };
    let mut labels = Vec::with_capacity(fiber.len());
    let mut scratch = vec![0u32; n * n];
    for v in 0..fiber.len() {
        let entries = fiber.entries(v);
        let mut found: Vec<FiberEdge> = Vec::new();
        for m in &moves {
            if m.subtracted().iter().any(|&(i, j)| entries[i * n + j] == 0) {
                continue;
            }
            scratch.copy_from_slice(entries);
            for (i, j) in m.subtracted() {
                scratch[i * n + j] -= 1;
            }
            for (i, j) in m.added() {
                scratch[i * n + j] += 1;
            }
            let target = fiber
                .index_of_entries(&scratch)
                .expect("a valid move stays inside the fiber");
            found.push(FiberEdge { target, label: *m, multiplicity: 1 });
        }
        // Moves were visited in canonical order and the sort is stable, so
        // the first entry per target carries the least label.
        found.sort_by_key(|e| e.target);
        let mut merged: Vec<FiberEdge> = Vec::with_capacity(found.len());
        for e in found {
            match merged.last_mut() {
                Some(last) if last.target == e.target => last.multiplicity += 1,
                _ => merged.push(e),
            }
        }
        labels.push(merged);
    }
    let adj = labels.iter().map(|list| list.iter().map(|e| e.target).collect()).collect();
    FiberGraph { fiber, graph: UGraph { adj }, labels }
}

/// Weights `w[i][j]` applied to tables by `w . v = sum w_ij v_ij`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightVector {
    n: usize,
    w: Vec<i64>,
}

impl WeightVector {
    /// `w[i][j] = (i + j)^2` with 1-based `i`, `j`.
    pub fn squared_index_sum(n: usize) -> Self {
        let w = (0..n)
            .flat_map(|i| (0..n).map(move |j| ((i + j + 2) * (i + j + 2)) as i64))
            .collect();
        Self { n, w }
    }

    /// Arbitrary row-major weights.
    pub fn from_entries(n: usize, w: Vec<i64>) -> Result<Self> {
        if w.len() != n * n {
            return Err(Error::InvalidDimension("weight vector must have n*n entries".into()));
        }
        Ok(Self { n, w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.w[row * self.n + col]
    }

    pub fn negated(&self) -> Self {
        Self { n: self.n, w: self.w.iter().map(|x| -x).collect() }
    }

    pub fn dot(&self, entries: &[u32]) -> i64 {
        self.w.iter().zip(entries).map(|(&w, &x)| w * i64::from(x)).sum()
    }

    /// Change in `w . v` when `m` is applied.
    pub fn move_delta(&self, m: &MarkovMove) -> i64 {
        let plus: i64 = m.added().iter().map(|&(i, j)| self.get(i, j)).sum();
        let minus: i64 = m.subtracted().iter().map(|&(i, j)| self.get(i, j)).sum();
        plus - minus
    }
}

/// A fiber graph with every edge directed toward the lower weight.
#[derive(Debug, Clone)]
pub struct OrientedFiberGraph {
    base: FiberGraph,
    out: Vec<Vec<usize>>,
}

impl OrientedFiberGraph {
    pub fn base(&self) -> &FiberGraph {
        &self.base
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// Directed edges `(from, to)` sorted by `from`, then `to`.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out.iter().enumerate().flat_map(|(u, list)| list.iter().map(move |&v| (u, v)))
    }

    /// Kahn's algorithm; true when every vertex gets a topological position.
    pub fn is_acyclic(&self) -> bool {
        let n = self.out.len();
        let mut indegree = vec![0usize; n];
        for list in &self.out {
            for &v in list {
                indegree[v] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut seen = 0;
        while let Some(u) = queue.pop_front() {
            seen += 1;
            for &v in &self.out[u] {
                indegree[v] -= 1;
                if indegree[v] == 0 {
                    queue.push_back(v);
                }
            }
        }
        seen == n
    }
}

/// Directs each edge `u -- v` as `u -> v` when `w . v < w . u`.
pub fn orient(graph: FiberGraph, weights: &WeightVector) -> Result<OrientedFiberGraph> {
    if weights.n() != graph.fiber().n() {
        return Err(Error::InvalidDimension("weight vector has the wrong size".into()));
    }
    let mut out = vec![Vec::new(); graph.vertex_count()];
    for (u, list) in out.iter_mut().enumerate() {
        for e in graph.edges_of(u) {
            match weights.move_delta(&e.label) {
                0 => return Err(Error::ZeroWeightEdge { from: u, to: e.target }),
                d if d < 0 => list.push(e.target),
                _ => {}
            }
        }
    }
    Ok(OrientedFiberGraph { base: graph, out })
}

/// Vertices without outgoing arcs.
pub fn find_sinks(og: &OrientedFiberGraph) -> Vec<usize> {
    (0..og.out.len()).filter(|&v| og.out[v].is_empty()).collect()
}
