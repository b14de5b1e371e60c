//! Interactive distance preservers and the half-bunch hopset they are built on.

mod approx;
mod hopset;

pub use approx::{
    beta_l, build_3eps_preserver, build_eps_preserver_v1, build_eps_preserver_v2, build_eps_preserver_v2_with, gamma_43,
    three_eps_cap, v1_levels, v1_probs, v2_params, Preserver, PreserverKind, StoredPathStats,
    V2Params,
};
pub use hopset::{build_half_bunch_hopset, verify_hopset, Flag, FlaggedHop, Hopset, HopsetReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{dijkstra_sssp, EdgeId, PathEdge, PathResult, VertexId, WeightedGraph};
use crate::hierarchy::{Hierarchy, NONE};
use crate::oracle::{check_vertex, normalize, InteractiveOracle, QueryError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreserverError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("pair ({0},{1}) spans two components")]
    Unreachable(VertexId, VertexId),
    #[error("no path for ({u},{v}) within weight bound and {cap} hops")]
    NoPathWithinCap { u: VertexId, v: VertexId, cap: u64 },
}

/// Exact paths to the level-i pivot by next-hop chasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PivotNextHopMap {
    pub level: u32,
    pivot: Vec<VertexId>,
    next_edge: Vec<EdgeId>,
}

pub fn build_pivot_preserver(h: &Hierarchy, i: usize) -> PivotNextHopMap {
    let n = h.n();
    let pivot = (0..n as VertexId).map(|v| h.pivot(i, v).map_or(NONE, |p| p.0)).collect();
    let next_edge = (0..n as VertexId).map(|v| h.pivot_edge(i, v).unwrap_or(NONE)).collect();
    PivotNextHopMap { level: i as u32, pivot, next_edge }
}

impl PivotNextHopMap {
    pub fn pivot(&self, v: VertexId) -> Option<VertexId> {
        let p = self.pivot[v as usize];
        (p != NONE).then_some(p)
    }

    fn chase(&self, g: &WeightedGraph, v: VertexId) -> PathResult {
        let mut p = PathResult::trivial(v);
        let mut x = v;
        while self.next_edge[x as usize] != NONE {
            let e = self.next_edge[x as usize];
            let ed = g.edge(e);
            x = ed.other(x);
            p.push(PathEdge::Real(e), x, ed.w);
        }
        p
    }
}

impl InteractiveOracle for PivotNextHopMap {
    /// Answers `(v, p_i(v))` in either orientation.
    fn query(&self, g: &WeightedGraph, u: VertexId, v: VertexId) -> Result<PathResult, QueryError> {
        check_vertex(g, u)?;
        check_vertex(g, v)?;
        if self.pivot(u) == Some(v) {
            Ok(self.chase(g, u))
        } else if self.pivot(v) == Some(u) {
            Ok(self.chase(g, v).reversed())
        } else {
            Err(QueryError::NotInDemand(u, v))
        }
    }

    fn declared_stretch(&self) -> f64 {
        1.0
    }

    fn size_words(&self) -> usize {
        2 * self.pivot.len()
    }

    fn edge_set(&self) -> Vec<EdgeId> {
        let mut es: Vec<EdgeId> = self.next_edge.iter().copied().filter(|&e| e != NONE).collect();
        es.sort_unstable();
        es.dedup();
        es
    }
}

/// Explicit chosen shortest paths for a fixed set of pairs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExactPreserver {
    demand: Vec<(VertexId, VertexId)>,
    offsets: Vec<u32>,
    edges: Vec<EdgeId>,
}

/// Stores the chosen shortest path of every pair, one Dijkstra per distinct
/// smaller endpoint.
pub fn build_exact_pairwise_preserver(
    g: &WeightedGraph,
    pairs: &[(VertexId, VertexId)],
) -> Result<ExactPreserver, PreserverError> {
    let mut demand: Vec<_> = pairs.iter().map(|&(a, b)| normalize(a, b)).collect();
    demand.sort_unstable();
    demand.dedup();
    let mut paths = Vec::with_capacity(demand.len());
    let mut i = 0;
    while i < demand.len() {
        let src = demand[i].0;
        let t = dijkstra_sssp(g, src);
        while i < demand.len() && demand[i].0 == src {
            let dst = demand[i].1;
            let p = t.path_from_source(g, dst).ok_or(PreserverError::Unreachable(src, dst))?;
            paths.push(p.real_edges().collect::<Vec<_>>());
            i += 1;
        }
    }
    Ok(ExactPreserver::from_paths(demand, paths))
}

impl ExactPreserver {
    /// `paths[i]` runs from `demand[i].0` to `demand[i].1`; demand must be
    /// sorted, normalized and free of duplicates.
    pub fn from_paths(demand: Vec<(VertexId, VertexId)>, paths: Vec<Vec<EdgeId>>) -> Self {
        let mut offsets = Vec::with_capacity(demand.len() + 1);
        let mut edges = Vec::new();
        offsets.push(0);
        for p in paths {
            edges.extend(p);
            offsets.push(edges.len() as u32);
        }
        ExactPreserver { demand, offsets, edges }
    }

    pub fn demand(&self) -> &[(VertexId, VertexId)] {
        &self.demand
    }

    pub fn len(&self) -> usize {
        self.demand.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demand.is_empty()
    }
}

impl InteractiveOracle for ExactPreserver {
    fn query(&self, g: &WeightedGraph, u: VertexId, v: VertexId) -> Result<PathResult, QueryError> {
        let key = normalize(u, v);
        let idx = self.demand.binary_search(&key).map_err(|_| QueryError::NotInDemand(u, v))?;
        let mut p = PathResult::trivial(key.0);
        let mut x = key.0;
        for &e in &self.edges[self.offsets[idx] as usize..self.offsets[idx + 1] as usize] {
            let ed = g.edge(e);
            x = ed.other(x);
            p.push(PathEdge::Real(e), x, ed.w);
        }
        Ok(if u == key.0 { p } else { p.reversed() })
    }

    fn declared_stretch(&self) -> f64 {
        1.0
    }

    fn size_words(&self) -> usize {
        2 * self.demand.len() + self.edges.len()
    }

    fn edge_set(&self) -> Vec<EdgeId> {
        let mut es = self.edges.clone();
        es.sort_unstable();
        es.dedup();
        es
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{erdos_renyi, path_graph};
    use crate::graph::{validate_path, RealEdgeSet};
    use crate::hierarchy::build_hierarchy;
    use proptest::prelude::*;

    #[test]
    fn pivot_map_on_path() {
        let g = path_graph(3, 1.0);
        let h = Hierarchy::from_levels(&g, vec![vec![0, 1, 2], vec![2]], vec![], 0);
        let d = build_pivot_preserver(&h, 1);
        let p = d.query(&g, 0, 2).unwrap();
        assert_eq!((p.vertices.clone(), p.weight), (vec![0, 1, 2], 2.0));
        assert_eq!(d.query(&g, 2, 0).unwrap().vertices, vec![2, 1, 0]);
        assert_eq!(d.query(&g, 2, 2).unwrap().hops(), 0);
        assert_eq!(d.query(&g, 0, 1), Err(QueryError::NotInDemand(0, 1)));
    }

    #[test]
    fn exact_preserver_trivial_and_edges() {
        let g = erdos_renyi(30, 0.2, 1..2, true, 1);
        let d = build_exact_pairwise_preserver(&g, &[(3, 3)]).unwrap();
        assert_eq!(d.query(&g, 3, 3).unwrap().hops(), 0);
        // Unit weights make every edge a shortest path.
        let pairs: Vec<_> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        let d = build_exact_pairwise_preserver(&g, &pairs).unwrap();
        let mut ids: Vec<EdgeId> = (0..g.m() as EdgeId).collect();
        ids.sort_unstable();
        assert_eq!(d.edge_set(), ids);
        for e in g.edges() {
            assert_eq!(d.query(&g, e.v, e.u).unwrap().hops(), 1);
        }
        assert!(d.query(&g, 0, 0).is_err() || pairs.contains(&(0, 0)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn exact_preserver_is_exact(n in 20usize..80, seed in any::<u64>(), raw in prop::collection::vec((0u32..80, 0u32..80), 1..60)) {
            let g = erdos_renyi(n, 0.08, 1..50, true, seed);
            let pairs: Vec<_> = raw.into_iter().map(|(a, b)| (a % n as u32, b % n as u32)).collect();
            let d = build_exact_pairwise_preserver(&g, &pairs).unwrap();
            let s = RealEdgeSet::subset(&g, d.edge_set());
            for &(a, b) in &pairs {
                let p = d.query(&g, a, b).unwrap();
                let w = validate_path(&s, &p, a, b).unwrap();
                prop_assert_eq!(w, dijkstra_sssp(&g, a).dist[b as usize]);
            }
        }

        #[test]
        fn pivot_maps_are_exact(n in 20usize..80, seed in any::<u64>()) {
            let g = erdos_renyi(n, 0.08, 1..50, true, seed);
            let h = build_hierarchy(&g, &[0.3, 0.3], seed);
            for i in 0..h.l() {
                let d = build_pivot_preserver(&h, i);
                let s = RealEdgeSet::subset(&g, d.edge_set());
                prop_assert!(d.edge_set().len() < n);
                for v in 0..n as VertexId {
                    let (p, dp) = h.pivot(i, v).unwrap();
                    let path = d.query(&g, v, p).unwrap();
                    prop_assert_eq!(validate_path(&s, &path, v, p).unwrap(), dp);
                }
            }
        }
    }
}
