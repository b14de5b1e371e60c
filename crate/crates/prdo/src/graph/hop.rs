//! Hop-limited shortest paths in G plus a set of weighted virtual edges.
//!
//! Round r relaxes every edge leaving a vertex whose value changed in round
//! r-1, reading only round r-1 values, so the value of v after round r is the
//! exact minimum weight over walks of at most r hops. Each improvement is
//! logged per vertex, which lets a witness path be rebuilt for any round.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{PathEdge, PathResult, VertexId, WeightedGraph};

/// Virtual edges `(a, b, w)` added on top of a graph, indexed by position.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtraEdges {
    pub edges: Vec<(VertexId, VertexId, f64)>,
    #[serde(skip)]
    adj: Vec<Vec<(VertexId, u32)>>,
}

impl ExtraEdges {
    pub fn new(n: usize, edges: Vec<(VertexId, VertexId, f64)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (i, &(a, b, _)) in edges.iter().enumerate() {
            adj[a as usize].push((b, i as u32));
            adj[b as usize].push((a, i as u32));
        }
        ExtraEdges { edges, adj }
    }

    pub fn none(n: usize) -> Self {
        Self::new(n, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    fn neighbors(&self, v: VertexId) -> &[(VertexId, u32)] {
        self.adj.get(v as usize).map(|a| a.as_slice()).unwrap_or(&[])
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum HopLimitedError {
    #[error("{v} unreachable from {u} within {beta} hops")]
    Unreachable { u: VertexId, v: VertexId, beta: u64 },
    #[error("hop bound must be at least 1")]
    ZeroBeta,
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    round: u64,
    pred: VertexId,
    step: PathEdge,
    dist: f64,
}

/// Per-round value history of a hop-limited search from one source.
pub struct HopLayers {
    hist: Vec<Vec<Entry>>,
    rounds: u64,
}

impl HopLayers {
    /// Runs at most `cap` rounds from `source`. Stops early once the frontier
    /// empties or every `(target, bound)` has value within its bound.
    pub fn run(
        g: &WeightedGraph,
        extra: &ExtraEdges,
        source: VertexId,
        cap: u64,
        targets: &[(VertexId, f64)],
    ) -> Self {
        let n = g.n();
        let mut hist: Vec<Vec<Entry>> = vec![Vec::new(); n];
        let mut cur = vec![f64::INFINITY; n];
        cur[source as usize] = 0.0;
        hist[source as usize].push(Entry {
            round: 0,
            pred: source,
            step: PathEdge::Virtual(u32::MAX),
            dist: 0.0,
        });
        let satisfied = |cur: &[f64]| targets.iter().all(|&(t, b)| cur[t as usize] <= b);
        let mut frontier = vec![source];
        let mut in_next = vec![false; n];
        let mut rounds = 0u64;
        let mut updates: Vec<(VertexId, f64, VertexId, PathEdge)> = Vec::new();
        while rounds < cap && !frontier.is_empty() && !(!targets.is_empty() && satisfied(&cur)) {
            rounds += 1;
            updates.clear();
            let mut best = cur.clone();
            for &x in &frontier {
                let dx = cur[x as usize];
                let real = g.neighbors(x).iter().map(|&(y, e)| (y, PathEdge::Real(e), g.edge(e).w));
                let virt = extra
                    .neighbors(x)
                    .iter()
                    .map(|&(y, i)| (y, PathEdge::Virtual(i), extra.edges[i as usize].2));
                for (y, step, w) in real.chain(virt) {
                    let nd = dx + w;
                    if nd < best[y as usize] {
                        best[y as usize] = nd;
                        updates.push((y, nd, x, step));
                    }
                }
            }
            let mut next = Vec::new();
            for &(y, nd, x, step) in &updates {
                // Only the final (smallest) update of each vertex survives.
                if nd == best[y as usize] && nd < cur[y as usize] {
                    cur[y as usize] = nd;
                    hist[y as usize].push(Entry { round: rounds, pred: x, step, dist: nd });
                    if !in_next[y as usize] {
                        in_next[y as usize] = true;
                        next.push(y);
                    }
                }
            }
            for &y in &next {
                in_next[y as usize] = false;
            }
            next.sort_unstable();
            frontier = next;
        }
        HopLayers { hist, rounds }
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    fn entry_at(&self, v: VertexId, round: u64) -> Option<&Entry> {
        let h = &self.hist[v as usize];
        let idx = h.partition_point(|e| e.round <= round);
        (idx > 0).then(|| &h[idx - 1])
    }

    /// Minimum weight over walks of at most `round` hops (capped by rounds run).
    pub fn value(&self, v: VertexId, round: u64) -> f64 {
        self.entry_at(v, round).map_or(f64::INFINITY, |e| e.dist)
    }

    /// Value after the last round that was run.
    pub fn final_value(&self, v: VertexId) -> f64 {
        self.value(v, self.rounds)
    }

    /// Smallest hop count whose value is within `bound`.
    pub fn first_round_within(&self, v: VertexId, bound: f64) -> Option<u64> {
        self.hist[v as usize].iter().find(|e| e.dist <= bound).map(|e| e.round)
    }

    /// Witness path from the source to `v` realizing `value(v, round)`.
    pub fn path(&self, v: VertexId, round: u64) -> Option<PathResult> {
        let mut rev_vertices = vec![v];
        let mut rev_edges = Vec::new();
        let target = self.entry_at(v, round)?;
        let weight = target.dist;
        let (mut x, mut r) = (v, round);
        loop {
            let e = *self.entry_at(x, r)?;
            if e.round == 0 {
                break;
            }
            rev_edges.push(e.step);
            rev_vertices.push(e.pred);
            x = e.pred;
            r = e.round - 1;
        }
        rev_vertices.reverse();
        rev_edges.reverse();
        Some(PathResult { vertices: rev_vertices, edges: rev_edges, weight })
    }
}

/// Minimum `u`-`v` weight in `g` plus `extra` over paths with at most `beta`
/// edges, with one witnessing path.
pub fn hop_limited_distance(
    g: &WeightedGraph,
    extra: &ExtraEdges,
    u: VertexId,
    v: VertexId,
    beta: u64,
) -> Result<(f64, PathResult), HopLimitedError> {
    if beta == 0 {
        return Err(HopLimitedError::ZeroBeta);
    }
    if u == v {
        return Ok((0.0, PathResult::trivial(u)));
    }
    let layers = HopLayers::run(g, extra, u, beta, &[]);
    let d = layers.final_value(v);
    if !d.is_finite() {
        return Err(HopLimitedError::Unreachable { u, v, beta });
    }
    let p = layers.path(v, layers.rounds()).expect("finite value has a witness");
    Ok((d, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::path::Union;
    use crate::graph::{dijkstra_sssp, validate_path, RealEdgeSet};
    use proptest::prelude::*;

    fn triangle() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 2, 10.0), (0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn same_vertex_is_free() {
        let g = triangle();
        let (d, p) = hop_limited_distance(&g, &ExtraEdges::none(3), 1, 1, 1).unwrap();
        assert_eq!(d, 0.0);
        assert!(p.edges.is_empty());
    }

    #[test]
    fn hop_cap_forces_direct_edge() {
        let g = triangle();
        let x = ExtraEdges::none(3);
        let (d1, p1) = hop_limited_distance(&g, &x, 0, 2, 1).unwrap();
        assert_eq!((d1, p1.vertices), (10.0, vec![0, 2]));
        let (d2, p2) = hop_limited_distance(&g, &x, 0, 2, 2).unwrap();
        assert_eq!((d2, p2.vertices), (2.0, vec![0, 1, 2]));
    }

    #[test]
    fn unreachable_within_cap() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let x = ExtraEdges::none(4);
        assert_eq!(
            hop_limited_distance(&g, &x, 0, 3, 2),
            Err(HopLimitedError::Unreachable { u: 0, v: 3, beta: 2 })
        );
        assert_eq!(hop_limited_distance(&g, &x, 0, 3, 0), Err(HopLimitedError::ZeroBeta));
    }

    #[test]
    fn virtual_edges_shortcut() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let x = ExtraEdges::new(4, vec![(0, 3, 3.0)]);
        let (d, p) = hop_limited_distance(&g, &x, 0, 3, 1).unwrap();
        assert_eq!(d, 3.0);
        assert_eq!(p.edges, vec![PathEdge::Virtual(0)]);
    }

    proptest! {
        #[test]
        fn monotone_in_beta_and_exact_when_uncapped(
            n in 3usize..25,
            es in prop::collection::vec((0u32..25, 0u32..25, 1u32..30), 5..80),
            extra in prop::collection::vec((0u32..25, 0u32..25), 0..6),
        ) {
            let g = WeightedGraph::new(
                n,
                es.iter().filter(|(a, b, _)| a != b && (*a as usize) < n && (*b as usize) < n)
                    .map(|&(a, b, w)| (a, b, w as f64)),
            ).unwrap();
            let t0 = dijkstra_sssp(&g, 0);
            // Virtual edges carry exact distances so they never undercut the metric.
            let xs: Vec<_> = extra.iter()
                .filter(|(a, b, )| (*a as usize) < n && (*b as usize) < n && a != b)
                .filter_map(|&(a, b)| {
                    let d = dijkstra_sssp(&g, a).dist[b as usize];
                    d.is_finite().then_some((a, b, d))
                })
                .collect();
            let x = ExtraEdges::new(n, xs.clone());
            let real = RealEdgeSet::all(&g);
            let uni = Union(&real, &xs);
            for v in 0..n as u32 {
                let mut prev = f64::INFINITY;
                for beta in 1..n as u64 {
                    match hop_limited_distance(&g, &x, 0, v, beta) {
                        Ok((d, p)) => {
                            prop_assert!(d <= prev);
                            prop_assert!(p.hops() as u64 <= beta);
                            prop_assert_eq!(validate_path(&uni, &p, 0, v).unwrap(), d);
                            prev = d;
                        }
                        Err(_) => prop_assert!(prev.is_infinite()),
                    }
                }
                let last = hop_limited_distance(&g, &x, 0, v, n as u64).map(|r| r.0).unwrap_or(f64::INFINITY);
                prop_assert_eq!(last, t0.dist[v as usize]);
            }
        }
    }
}
