//! Interactive emulators over a finite metric given as a complete graph.
//!
//! An emulator answers `(u, v)` with a path over its own weighted edge set
//! whose weight lies between `d(u,v)` and the declared stretch times it.

mod ap;
mod cover;
mod hst;
mod mn;
mod tz;

pub use ap::{build_ap_emulator, ApEmulator};
pub use cover::{check_cover, coarsen_cover, neighborhood_cover, Cover, CoverCluster, CoverError};
pub use hst::{gupta_contract, hst_edge_weights, ContractedTree, Hst, HstError, WeightedTree, CONTRACTION_BOUND};
pub use mn::{build_mn_emulator, build_mn_hierarchy, MnEmulator, MnHierarchy, MnLevel};
pub use tz::{build_tz_emulator, TzEmulator};

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{dijkstra_sssp, EdgeUniverse, PathEdge, PathResult, VertexId, WeightedGraph};
use crate::oracle::QueryError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmulatorError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("round {0} settled no point after repeated attempts")]
    RetryExhausted(usize),
    #[error(transparent)]
    Tree(#[from] HstError),
    #[error(transparent)]
    Cover(#[from] CoverError),
}

/// Exact distances among a point set, indexed `0..len()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricGraph {
    /// Graph vertex behind each point.
    pub points: Vec<VertexId>,
    dist: Vec<f64>,
}

impl MetricGraph {
    /// Distances between `points` in `g`, one Dijkstra per point.
    pub fn from_subset(g: &WeightedGraph, points: &[VertexId]) -> Self {
        let rows: Vec<Vec<f64>> = points
            .par_iter()
            .map(|&s| {
                let t = dijkstra_sssp(g, s);
                points.iter().map(|&p| t.dist[p as usize]).collect()
            })
            .collect();
        MetricGraph { points: points.to_vec(), dist: rows.concat() }
    }

    /// Shortest-path metric of the whole graph.
    pub fn of_graph(g: &WeightedGraph) -> Self {
        let all: Vec<VertexId> = (0..g.n() as VertexId).collect();
        Self::from_subset(g, &all)
    }

    pub fn from_matrix(d: &[Vec<f64>]) -> Self {
        MetricGraph { points: (0..d.len() as VertexId).collect(), dist: d.concat() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn d(&self, i: VertexId, j: VertexId) -> f64 {
        self.dist[i as usize * self.len() + j as usize]
    }

    /// Complete graph on the points with one edge per finitely distant pair.
    pub fn complete_graph(&self) -> WeightedGraph {
        let n = self.len() as VertexId;
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter_map(|(i, j)| {
            let w = self.d(i, j);
            w.is_finite().then_some((i, j, w))
        });
        WeightedGraph::new(self.len(), edges.collect::<Vec<_>>()).expect("metric distances are positive")
    }

    /// Smallest positive and largest finite distance.
    pub fn extent(&self) -> (f64, f64) {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for &x in &self.dist {
            if x > 0.0 && x.is_finite() {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        (lo, hi)
    }
}

/// An emulator over points `0..points()`. Answers use `Virtual(i)` steps
/// indexing `edge(i)`.
pub trait InteractiveEmulator: Sync {
    fn points(&self) -> usize;
    fn query(&self, u: VertexId, v: VertexId) -> Result<PathResult, QueryError>;
    fn edge(&self, i: u32) -> (VertexId, VertexId, f64);
    /// Indices of every edge an answer may use.
    fn used_edges(&self) -> Vec<u32>;
    fn declared_stretch(&self) -> f64;
    fn size_words(&self) -> usize;
}

/// The used edges of an emulator as an edge universe for path validation.
pub struct EmulatorEdges<'a> {
    em: &'a dyn InteractiveEmulator,
    used: HashSet<u32>,
}

impl<'a> EmulatorEdges<'a> {
    pub fn new(em: &'a dyn InteractiveEmulator) -> Self {
        EmulatorEdges { em, used: em.used_edges().into_iter().collect() }
    }
}

impl EdgeUniverse for EmulatorEdges<'_> {
    fn lookup(&self, e: PathEdge) -> Option<(VertexId, VertexId, f64)> {
        match e {
            PathEdge::Virtual(i) if self.used.contains(&i) => Some(self.em.edge(i)),
            _ => None,
        }
    }
}

/// Rewrites graph-edge steps as virtual steps with the same index.
pub(crate) fn as_virtual(mut p: PathResult) -> PathResult {
    for e in p.edges.iter_mut() {
        if let PathEdge::Real(id) = *e {
            *e = PathEdge::Virtual(id);
        }
    }
    p
}

pub(crate) fn check_point(n: usize, v: VertexId) -> Result<(), QueryError> {
    if (v as usize) < n {
        Ok(())
    } else {
        Err(QueryError::OutOfRange(v))
    }
}

/// Path between `u` and `v` in a rooted forest given by per-vertex parent,
/// parent-edge index and depth, by stepping the deeper endpoint upward.
pub(crate) fn forest_path(
    u: VertexId,
    v: VertexId,
    parent: impl Fn(VertexId) -> Option<(VertexId, u32, f64)>,
    depth: impl Fn(VertexId) -> u32,
) -> Option<PathResult> {
    let mut up = PathResult::trivial(u);
    let mut down = PathResult::trivial(v);
    let (mut a, mut b) = (u, v);
    while a != b {
        let (da, db) = (depth(a), depth(b));
        if da >= db {
            let (p, e, w) = parent(a)?;
            up.push(PathEdge::Virtual(e), p, w);
            a = p;
        } else {
            let (p, e, w) = parent(b)?;
            down.push(PathEdge::Virtual(e), p, w);
            b = p;
        }
    }
    up.extend(&down.reversed());
    Some(up)
}
