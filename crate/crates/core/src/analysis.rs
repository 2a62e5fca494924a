//! Distances, diameter and vertex connectivity of fiber graphs, plus the
//! disjoint-path constructions used to certify connectivity.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::flow::SplitNetwork;
use crate::graph::{FiberGraph, UGraph};
use crate::table::{ContingencyTable, MarkovMove};
use crate::{Error, Result};

/// Shortest-path distances from `source`; `None` for unreachable vertices.
pub fn bfs_distances(g: &UGraph, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.vertex_count()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].expect("queued vertices have a distance");
        for &w in g.neighbors(u) {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Largest distance between two vertices.
pub fn diameter(g: &UGraph) -> Result<usize> {
    let mut best = 0;
    for s in 0..g.vertex_count() {
        for d in bfs_distances(g, s) {
            best = best.max(d.ok_or(Error::DisconnectedGraph)?);
        }
    }
    Ok(best)
}

/// `(r I, r P)` with `P` the cyclic shift; their distance in `G(n, r)` is
/// `(n - 1) r`, the diameter.
pub fn diameter_witness_pair(n: usize, r: u32) -> (ContingencyTable, ContingencyTable) {
    (ContingencyTable::diagonal(n, r), ContingencyTable::cyclic_shift(n, r))
}

fn check_pair(g: &UGraph, u: usize, v: usize) -> Result<()> {
    for x in [u, v] {
        if x >= g.vertex_count() {
            return Err(Error::VertexOutOfRange(x));
        }
    }
    if u == v {
        return Err(Error::SameVertex(u, v));
    }
    if g.has_edge(u, v) {
        return Err(Error::AdjacentPair(u, v));
    }
    Ok(())
}

/// Maximum number of internally vertex-disjoint `u`-`v` paths for a
/// non-adjacent pair.
pub fn local_connectivity(g: &UGraph, u: usize, v: usize) -> Result<usize> {
    check_pair(g, u, v)?;
    Ok(SplitNetwork::new(g).max_flow(u, v, usize::MAX))
}

/// Like [`local_connectivity`] but also returns a family of disjoint paths
/// of that size and a minimum separating vertex set.
pub fn local_connectivity_certified(g: &UGraph, u: usize, v: usize) -> Result<(Vec<Vec<usize>>, Vec<usize>)> {
    check_pair(g, u, v)?;
    let mut net = SplitNetwork::new(g);
    let (_, cut) = net.min_vertex_cut(u, v);
    Ok((net.flow_paths(u, v), cut))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CutWitness {
    /// The graph is complete; no vertex set disconnects it.
    Complete,
    /// Removing these vertices disconnects the graph.
    Cut(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityReport {
    pub kappa: usize,
    pub witness: CutWitness,
    pub min_degree: usize,
    /// `kappa == min_degree`.
    pub conjecture_holds: bool,
}

impl ConnectivityReport {
    /// Re-checks the witness by BFS on the graph with the cut removed.
    pub fn witness_disconnects(&self, g: &UGraph) -> bool {
        match &self.witness {
            CutWitness::Complete => g.is_complete(),
            CutWitness::Cut(cut) => {
                let mut removed = vec![false; g.vertex_count()];
                for &v in cut {
                    removed[v] = true;
                }
                cut.len() == self.kappa && !g.is_connected_without(&removed)
            }
        }
    }
}

/// The pairs whose local connectivities determine `kappa` for a non-complete
/// graph: a fixed minimum-degree vertex `s` against each of its non-neighbours,
/// then every non-adjacent pair of neighbours of `s` (Esfahanian-Hakimi).
#[derive(Debug, Clone)]
pub struct CandidatePairs {
    pub source: usize,
    pub pairs: Vec<(usize, usize)>,
}

pub fn connectivity_candidates(g: &UGraph) -> CandidatePairs {
    let n = g.vertex_count();
    let source = (0..n).min_by_key(|&v| (g.degree(v), v)).unwrap_or(0);
    let mut pairs = Vec::new();
    if n == 0 {
        return CandidatePairs { source, pairs };
    }
    for w in 0..n {
        if w != source && !g.has_edge(source, w) {
            pairs.push((source, w));
        }
    }
    let nbrs = g.neighbors(source);
    for (a, &x) in nbrs.iter().enumerate() {
        for &y in &nbrs[a + 1..] {
            if !g.has_edge(x, y) {
                pairs.push((x, y));
            }
        }
    }
    CandidatePairs { source, pairs }
}

/// Exact vertex connectivity with a verified minimum cut.
///
/// Starts from the bound `kappa <= min degree` (witnessed by the neighbours
/// of a minimum-degree vertex) and lowers it with capped max-flow queries
/// over [`connectivity_candidates`].
pub fn vertex_connectivity(g: &UGraph) -> ConnectivityReport {
    let n = g.vertex_count();
    let min_degree = g.min_degree();
    if n <= 1 || g.is_complete() {
        let kappa = n.saturating_sub(1);
        return ConnectivityReport {
            kappa,
            witness: CutWitness::Complete,
            min_degree,
            conjecture_holds: kappa == min_degree,
        };
    }
    let candidates = connectivity_candidates(g);
    let mut best = min_degree;
    let mut witness = g.neighbors(candidates.source).to_vec();
    let mut net = SplitNetwork::new(g);
    for &(s, t) in &candidates.pairs {
        if best == 0 {
            break;
        }
        if net.max_flow(s, t, best) < best {
            let (flow, cut) = net.min_vertex_cut(s, t);
            best = flow;
            witness = cut;
        }
    }
    ConnectivityReport {
        kappa: best,
        witness: CutWitness::Cut(witness),
        min_degree,
        conjecture_holds: best == min_degree,
    }
}

/// All pairs `(u, v)`, `u < v`, at distance exactly two.
pub fn distance_two_pairs(g: &UGraph) -> Vec<(usize, usize)> {
    let n = g.vertex_count();
    let mut out = Vec::new();
    let mut mark = vec![usize::MAX; n];
    for u in 0..n {
        mark[u] = u;
        for &w in g.neighbors(u) {
            mark[w] = u;
        }
        let mut found = Vec::new();
        for &w in g.neighbors(u) {
            for &v in g.neighbors(w) {
                if v > u && mark[v] != u {
                    mark[v] = u;
                    found.push(v);
                }
            }
        }
        found.sort_unstable();
        out.extend(found.into_iter().map(|v| (u, v)));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiuReport {
    pub k: usize,
    /// Every distance-two pair has at least `k` disjoint paths.
    pub holds: bool,
    /// First pair (in pair order) attaining the minimum local connectivity.
    pub min_pair: Option<(usize, usize)>,
    pub min_value: Option<usize>,
    pub pairs_checked: usize,
}

/// Checks the hypothesis of Liu's criterion: at least `k` internally
/// disjoint paths between every pair of vertices at distance two.
pub fn liu_check(g: &UGraph, k: usize) -> LiuReport {
    let pairs = distance_two_pairs(g);
    let mut net = SplitNetwork::new(g);
    let values = pairs.iter().map(|&(u, v)| net.max_flow(u, v, usize::MAX));
    summarize_liu(k, &pairs, values)
}

/// Folds per-pair local connectivities (in `pairs` order) into a report.
pub fn summarize_liu(k: usize, pairs: &[(usize, usize)], values: impl IntoIterator<Item = usize>) -> LiuReport {
    let mut min: Option<((usize, usize), usize)> = None;
    let mut count = 0;
    for (&pair, value) in pairs.iter().zip(values) {
        count += 1;
        if min.is_none_or(|(_, m)| value < m) {
            min = Some((pair, value));
        }
    }
    LiuReport {
        k,
        holds: min.is_none_or(|(_, m)| m >= k),
        min_pair: min.map(|(p, _)| p),
        min_value: min.map(|(_, m)| m),
        pairs_checked: count,
    }
}

/// Moves valid at both `u` and `v`.
pub fn common_moves(u: &ContingencyTable, v: &ContingencyTable) -> Vec<MarkovMove> {
    u.valid_moves().into_iter().filter(|m| v.is_valid_move(m)).collect()
}

/// Disjoint `u`-`v` paths built from detours `M, D1, D2, -M` around a fixed
/// two-step route `u -> u + D1 -> u + D1 + D2 = v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetourPathReport {
    pub u: usize,
    pub v: usize,
    /// The canonically least decomposition `(D1, D2)`.
    pub middle_moves: (MarkovMove, MarkovMove),
    /// Number of decompositions `u + D1 + D2 = v`, i.e. common neighbours.
    pub decompositions: usize,
    /// Accepted paths as vertex sequences, the direct two-step path first.
    pub paths: Vec<Vec<usize>>,
    /// `paths.len()`.
    pub count_disjoint: usize,
}

/// For every move `M` valid at `u` (canonical order) walks
/// `u + M, + D1, + D2, - M`, cutting the walk short where it first reaches
/// `v`. Walks leaving the fiber or repeating a vertex are dropped, and the
/// rest are accepted greedily while their interiors stay disjoint from every
/// path accepted so far. The count is a lower bound on the local
/// connectivity.
pub fn detour_paths(fg: &FiberGraph, u: usize, v: usize) -> Result<DetourPathReport> {
    let g = fg.graph();
    check_pair(g, u, v).map_err(|_| Error::NotDistanceTwo { u, v })?;
    let mut decompositions: Vec<(MarkovMove, MarkovMove, usize)> = g
        .neighbors(u)
        .iter()
        .filter(|&&w| g.has_edge(w, v))
        .map(|&w| {
            let d1 = fg.edge(u, w).expect("neighbour").label;
            let d2 = fg.edge(w, v).expect("neighbour").label;
            (d1, d2, w)
        })
        .collect();
    if decompositions.is_empty() {
        return Err(Error::NotDistanceTwo { u, v });
    }
    decompositions.sort();
    let (d1, d2, middle) = decompositions[0];

    let fiber = fg.fiber();
    let start = fg.table(u);
    let mut used = vec![false; fg.vertex_count()];
    used[middle] = true;
    let mut paths = vec![vec![u, middle, v]];
    for m in start.valid_moves() {
        let Some(path) = detour_walk(fiber, &start, v, &[m, d1, d2, m.negated()]) else {
            continue;
        };
        let interior = &path[1..path.len() - 1];
        if interior.iter().any(|&x| used[x]) {
            continue;
        }
        for &x in interior {
            used[x] = true;
        }
        paths.push(path);
    }
    Ok(DetourPathReport {
        u,
        v,
        middle_moves: (d1, d2),
        decompositions: decompositions.len(),
        count_disjoint: paths.len(),
        paths,
    })
}

fn detour_walk(
    fiber: &crate::enumerate::Fiber,
    start: &ContingencyTable,
    target: usize,
    steps: &[MarkovMove],
) -> Option<Vec<usize>> {
    let mut current = start.clone();
    let mut path = vec![fiber.index_of(start)?];
    for m in steps {
        current.apply_move_in_place(m).ok()?;
        let id = fiber.index_of(&current)?;
        if path.contains(&id) {
            return None;
        }
        path.push(id);
        if id == target {
            return Some(path);
        }
    }
    None
}

/// Two `k`-dimensional hypercube skeletons joined by one edge between their
/// zero corners: minimum degree `k`, connectivity one.
pub fn hemmecke_graph(k: usize) -> (UGraph, ConnectivityReport) {
    let half = 1usize << k;
    let mut edges = Vec::new();
    for offset in [0, half] {
        for x in 0..half {
            for bit in 0..k {
                let y = x ^ (1 << bit);
                if x < y {
                    edges.push((offset + x, offset + y));
                }
            }
        }
    }
    edges.push((0, half));
    let g = UGraph::from_edges(2 * half, edges).expect("ids are in range");
    let report = vertex_connectivity(&g);
    (g, report)
}

/// Cut vertices, sorted (iterative Hopcroft-Tarjan).
pub fn articulation_points(g: &UGraph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut order = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_cut = vec![false; n];
    let mut clock = 0;
    for root in 0..n {
        if order[root] != usize::MAX {
            continue;
        }
        order[root] = clock;
        low[root] = clock;
        clock += 1;
        let mut root_children = 0;
        // (vertex, parent, next neighbour index)
        let mut stack = vec![(root, usize::MAX, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (v, parent, next) = *top;
            if let Some(&w) = g.neighbors(v).get(next) {
                top.2 += 1;
                if order[w] == usize::MAX {
                    order[w] = clock;
                    low[w] = clock;
                    clock += 1;
                    if v == root {
                        root_children += 1;
                    }
                    stack.push((w, v, 0));
                } else if w != parent {
                    low[v] = low[v].min(order[w]);
                }
            } else {
                stack.pop();
                if parent != usize::MAX {
                    low[parent] = low[parent].min(low[v]);
                    if parent != root && low[v] >= order[parent] {
                        is_cut[parent] = true;
                    }
                }
            }
        }
        if root_children > 1 {
            is_cut[root] = true;
        }
    }
    (0..n).filter(|&v| is_cut[v]).collect()
}
