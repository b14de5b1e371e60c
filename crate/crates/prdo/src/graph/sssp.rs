//! Dijkstra variants sharing one tie-breaking rule.
//!
//! Every path is ranked by (weight, sum of per-edge hashes). The hash sum is
//! additive, so the rule is the same from either endpoint and every subpath of
//! a chosen path is itself chosen. Single-source, multi-source and truncated
//! searches therefore all agree on which shortest path joins two vertices.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use ordered_float::OrderedFloat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EdgeId, PathEdge, PathResult, VertexId, WeightedGraph};
use crate::util::splitmix64;

const NONE: u32 = u32::MAX;

/// Pseudo-random 64-bit label of an edge used to break distance ties.
pub fn edge_hash(e: EdgeId) -> u64 {
    splitmix64(0xA076_1D64_78BD_642F ^ e as u64)
}

type Key = Reverse<(OrderedFloat<f64>, u32, u128, VertexId)>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortestPathTree {
    pub source: VertexId,
    pub dist: Vec<f64>,
    /// Edge toward the source, `u32::MAX` for the source and unreachable vertices.
    pub parent_edge: Vec<EdgeId>,
}

impl ShortestPathTree {
    pub fn parent(&self, g: &WeightedGraph, v: VertexId) -> Option<VertexId> {
        let e = self.parent_edge[v as usize];
        (e != NONE).then(|| g.edge(e).other(v))
    }

    /// The chosen path from `v` to the source, or `None` if unreachable.
    pub fn path_to_source(&self, g: &WeightedGraph, v: VertexId) -> Option<PathResult> {
        if !self.dist[v as usize].is_finite() {
            return None;
        }
        let mut p = PathResult::trivial(v);
        let mut x = v;
        while x != self.source {
            let e = self.parent_edge[x as usize];
            let ed = g.edge(e);
            x = ed.other(x);
            p.push(PathEdge::Real(e), x, ed.w);
        }
        Some(p)
    }

    /// The chosen path from the source to `v`.
    pub fn path_from_source(&self, g: &WeightedGraph, v: VertexId) -> Option<PathResult> {
        self.path_to_source(g, v).map(|p| p.reversed())
    }
}

/// Exact single-source shortest paths under the global tie-breaking rule.
pub fn dijkstra_sssp(g: &WeightedGraph, source: VertexId) -> ShortestPathTree {
    let ms = multi_source_dijkstra(g, &[source]);
    ShortestPathTree { source, dist: ms.dist, parent_edge: ms.parent_edge }
}

/// Forest of shortest paths toward the nearest source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiSourceTree {
    pub dist: Vec<f64>,
    /// Nearest source, ties to the smallest id; `u32::MAX` if unreachable.
    pub nearest: Vec<VertexId>,
    pub parent_edge: Vec<EdgeId>,
}

impl MultiSourceTree {
    pub fn next_hop(&self, g: &WeightedGraph, v: VertexId) -> Option<VertexId> {
        let e = self.parent_edge[v as usize];
        (e != NONE).then(|| g.edge(e).other(v))
    }
}

/// Dijkstra from a set of sources. Each vertex is attached to its nearest
/// source, ties to the smaller source id, along that source's chosen path.
pub fn multi_source_dijkstra(g: &WeightedGraph, sources: &[VertexId]) -> MultiSourceTree {
    let n = g.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut owner = vec![NONE; n];
    let mut tb = vec![u128::MAX; n];
    let mut parent_edge = vec![NONE; n];
    let mut done = vec![false; n];
    let mut heap: BinaryHeap<Key> = BinaryHeap::new();
    for &s in sources {
        let si = s as usize;
        if owner[si] == NONE || s < owner[si] {
            dist[si] = 0.0;
            owner[si] = s;
            tb[si] = 0;
            heap.push(Reverse((OrderedFloat(0.0), s, 0, s)));
        }
    }
    while let Some(Reverse((OrderedFloat(d), o, t, x))) = heap.pop() {
        let xi = x as usize;
        if done[xi] || (d, o, t) != (dist[xi], owner[xi], tb[xi]) {
            continue;
        }
        done[xi] = true;
        for &(y, e) in g.neighbors(x) {
            let yi = y as usize;
            if done[yi] {
                continue;
            }
            let nd = d + g.edge(e).w;
            let nt = t + edge_hash(e) as u128;
            if (OrderedFloat(nd), o, nt) < (OrderedFloat(dist[yi]), owner[yi], tb[yi]) {
                dist[yi] = nd;
                owner[yi] = o;
                tb[yi] = nt;
                parent_edge[yi] = e;
                heap.push(Reverse((OrderedFloat(nd), o, nt, y)));
            }
        }
    }
    MultiSourceTree { dist, nearest: owner, parent_edge }
}

/// A vertex reached by a truncated search together with its tree data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterMember {
    pub v: VertexId,
    pub dist: f64,
    /// Next vertex toward the search source; the source points to itself.
    pub next: VertexId,
    pub edge: EdgeId,
}

/// Dijkstra from `source` that settles and expands only vertices for which
/// `admit(v, dist)` holds. Members are returned in settling order.
pub fn truncated_dijkstra<F>(g: &WeightedGraph, source: VertexId, mut admit: F) -> Vec<ClusterMember>
where
    F: FnMut(VertexId, f64) -> bool,
{
    let mut best: HashMap<VertexId, (f64, u128, EdgeId)> = HashMap::new();
    let mut settled: HashSet<VertexId> = HashSet::new();
    let mut out = Vec::new();
    let mut heap: BinaryHeap<Key> = BinaryHeap::new();
    best.insert(source, (0.0, 0, NONE));
    heap.push(Reverse((OrderedFloat(0.0), 0, 0, source)));
    while let Some(Reverse((OrderedFloat(d), _, t, x))) = heap.pop() {
        if settled.contains(&x) {
            continue;
        }
        let (bd, bt, be) = best[&x];
        if (bd, bt) != (d, t) {
            continue;
        }
        settled.insert(x);
        if !admit(x, d) {
            continue;
        }
        let next = if be == NONE { x } else { g.edge(be).other(x) };
        out.push(ClusterMember { v: x, dist: d, next, edge: be });
        for &(y, e) in g.neighbors(x) {
            if settled.contains(&y) {
                continue;
            }
            let nd = d + g.edge(e).w;
            let nt = t + edge_hash(e) as u128;
            let better = match best.get(&y) {
                None => true,
                Some(&(od, ot, _)) => (OrderedFloat(nd), nt) < (OrderedFloat(od), ot),
            };
            if better {
                best.insert(y, (nd, nt, e));
                heap.push(Reverse((OrderedFloat(nd), 0, nt, y)));
            }
        }
    }
    out
}

/// Exact distance matrix, one Dijkstra per row in parallel.
pub fn all_pairs(g: &WeightedGraph) -> Vec<Vec<f64>> {
    (0..g.n() as VertexId)
        .into_par_iter()
        .map(|s| multi_source_dijkstra(g, &[s]).dist)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{validate_path, RealEdgeSet};
    use proptest::prelude::*;

    fn bellman_ford(g: &WeightedGraph, s: VertexId) -> Vec<f64> {
        let mut d = vec![f64::INFINITY; g.n()];
        d[s as usize] = 0.0;
        for _ in 0..g.n() {
            for e in g.edges() {
                let (a, b) = (e.u as usize, e.v as usize);
                if d[a] + e.w < d[b] {
                    d[b] = d[a] + e.w;
                }
                if d[b] + e.w < d[a] {
                    d[a] = d[b] + e.w;
                }
            }
        }
        d
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
        (2..max_n).prop_flat_map(|n| {
            prop::collection::vec((0..n as u32, 0..n as u32, 1u32..20), 0..4 * n).prop_map(
                move |es| {
                    WeightedGraph::new(
                        n,
                        es.into_iter().filter(|(a, b, _)| a != b).map(|(a, b, w)| (a, b, w as f64)),
                    )
                    .unwrap()
                },
            )
        })
    }

    #[test]
    fn path_graph_distances() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(dijkstra_sssp(&g, 0).dist, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn isolated_source() {
        let g = WeightedGraph::new(3, [(1, 2, 1.0)]).unwrap();
        let t = dijkstra_sssp(&g, 0);
        assert_eq!(t.dist[0], 0.0);
        assert!(t.dist[1].is_infinite() && t.dist[2].is_infinite());
        assert!(t.path_to_source(&g, 1).is_none());
    }

    #[test]
    fn multi_source_prefers_smaller_id_on_ties() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let t = multi_source_dijkstra(&g, &[2, 0]);
        assert_eq!(t.nearest, vec![0, 0, 2]);
        assert_eq!(t.dist, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn truncated_search_respects_admission() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let m = truncated_dijkstra(&g, 0, |_, d| d < 2.0);
        let vs: Vec<_> = m.iter().map(|c| (c.v, c.dist, c.next)).collect();
        assert_eq!(vs, vec![(0, 0.0, 0), (1, 1.0, 0)]);
    }

    proptest! {
        #[test]
        fn matches_bellman_ford(g in arb_graph(40), s in 0u32..40) {
            let s = s % g.n() as u32;
            prop_assert_eq!(dijkstra_sssp(&g, s).dist, bellman_ford(&g, s));
        }

        #[test]
        fn deterministic_parent_edges(g in arb_graph(30)) {
            prop_assert_eq!(dijkstra_sssp(&g, 0), dijkstra_sssp(&g, 0));
        }

        #[test]
        fn chosen_paths_are_symmetric_and_suffix_closed(g in arb_graph(25)) {
            let trees: Vec<_> = (0..g.n() as u32).map(|s| dijkstra_sssp(&g, s)).collect();
            for u in 0..g.n() as u32 {
                for v in 0..g.n() as u32 {
                    let Some(p) = trees[v as usize].path_to_source(&g, u) else { continue };
                    let w = validate_path(&RealEdgeSet::all(&g), &p, u, v).unwrap();
                    prop_assert_eq!(w, trees[v as usize].dist[u as usize]);
                    let back = trees[u as usize].path_to_source(&g, v).unwrap();
                    prop_assert_eq!(&back.reversed().vertices, &p.vertices);
                    for (i, &x) in p.vertices.iter().enumerate() {
                        let suffix = trees[v as usize].path_to_source(&g, x).unwrap();
                        prop_assert_eq!(&suffix.vertices[..], &p.vertices[i..]);
                        let prefix = trees[x as usize].path_to_source(&g, u).unwrap();
                        prop_assert_eq!(&prefix.vertices[..], &p.vertices[..=i]);
                    }
                }
            }
        }

        #[test]
        fn multi_source_paths_agree_with_single_source(g in arb_graph(30), mask in any::<u64>()) {
            let sources: Vec<u32> = (0..g.n() as u32).filter(|v| mask >> (v % 64) & 1 == 1).collect();
            prop_assume!(!sources.is_empty());
            let ms = multi_source_dijkstra(&g, &sources);
            for v in 0..g.n() as u32 {
                let p = ms.nearest[v as usize];
                if p == NONE { continue; }
                let t = dijkstra_sssp(&g, p);
                prop_assert_eq!(ms.dist[v as usize], t.dist[v as usize]);
                prop_assert_eq!(ms.parent_edge[v as usize], t.parent_edge[v as usize]);
                let dmin = sources.iter().map(|&s| dijkstra_sssp(&g, s).dist[v as usize]).fold(f64::INFINITY, f64::min);
                prop_assert_eq!(ms.dist[v as usize], dmin);
            }
        }
    }
}
