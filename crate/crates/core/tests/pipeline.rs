//! Cross-module checks: enumeration feeding the graph, analysis, decomposition
//! and the sampler.

use fibergraph_core::analysis::{detour_paths, distance_two_pairs, local_connectivity};
use fibergraph_core::decomposition::decompose;
use fibergraph_core::enumerate::enumerate_fiber;
use fibergraph_core::graph::{build_graph, FiberGraph, UGraph};
use fibergraph_core::mcmc::{run_walk, WalkConfig};

fn fiber_graph(n: usize, r: u32) -> FiberGraph {
    build_graph(enumerate_fiber(n, r).unwrap())
}

fn assert_disjoint_paths(g: &UGraph, u: usize, v: usize, paths: &[Vec<usize>]) {
    let mut seen = vec![false; g.vertex_count()];
    for p in paths {
        assert_eq!((p[0], *p.last().unwrap()), (u, v));
        assert!(p.windows(2).all(|w| g.has_edge(w[0], w[1])), "{p:?} is not a path");
        for &x in &p[1..p.len() - 1] {
            assert!(!seen[x], "vertex {x} shared between detours");
            seen[x] = true;
        }
    }
}

#[test]
fn detours_reach_the_minimum_degree() {
    for (n, r) in [(3, 3), (4, 3)] {
        let fg = fiber_graph(n, r);
        let delta = n * (n - 1) / 2;
        for (u, v) in distance_two_pairs(fg.graph()) {
            let report = detour_paths(&fg, u, v).unwrap();
            assert!(report.count_disjoint >= delta, "G({n},{r}) pair ({u},{v}): {}", report.count_disjoint);
            assert_eq!(report.count_disjoint, report.paths.len());
            assert_disjoint_paths(fg.graph(), u, v, &report.paths);
        }
    }
}

#[test]
fn detours_never_exceed_local_connectivity() {
    let fg = fiber_graph(3, 3);
    for (u, v) in distance_two_pairs(fg.graph()).into_iter().step_by(7) {
        let report = detour_paths(&fg, u, v).unwrap();
        assert!(report.count_disjoint <= local_connectivity(fg.graph(), u, v).unwrap());
    }
}

#[test]
fn decompositions_of_every_table_sum_back() {
    let fg = fiber_graph(3, 4);
    for v in 0..fg.vertex_count() {
        let t = fg.table(v);
        let d = decompose(&t);
        assert_eq!(d.parts.len(), 4);
        assert_eq!(d.sum().as_deref(), Some(t.entries()));
    }
}

#[test]
fn walks_stay_on_graph_edges() {
    let fg = fiber_graph(3, 3);
    let start = fg.table(0);
    let config = WalkConfig { steps: 3000, burn_in: 0, thinning: 1, seed: 11, ..WalkConfig::default() };
    let mut previous = 0;
    run_walk(start, &config, |t| {
        let id = fg.fiber().index_of(t).unwrap();
        assert!(id == previous || fg.graph().has_edge(previous, id));
        previous = id;
    })
    .unwrap();
}
