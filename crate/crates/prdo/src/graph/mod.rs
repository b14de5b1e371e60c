//! Undirected weighted graphs, shortest paths with consistent tie-breaking,
//! hop-limited search and path validation.

mod hop;
mod io;
mod path;
mod sssp;

pub use hop::{hop_limited_distance, ExtraEdges, HopLayers, HopLimitedError};
pub use io::{load_graph, save_graph, Format};
pub use path::{validate_path, EdgeUniverse, PathEdge, PathError, PathResult, RealEdgeSet, Union};
pub use sssp::{
    all_pairs, dijkstra_sssp, edge_hash, multi_source_dijkstra, truncated_dijkstra, ClusterMember,
    MultiSourceTree, ShortestPathTree,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = u32;
pub type EdgeId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub w: f64,
}

impl Edge {
    /// The endpoint opposite to `x`.
    pub fn other(&self, x: VertexId) -> VertexId {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("edge ({u},{v}) has non-positive or non-finite weight {w}")]
    BadWeight { u: VertexId, v: VertexId, w: f64 },
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex {v} out of range for n={n}")]
    VertexOutOfRange { v: VertexId, n: usize },
}

/// Undirected graph with strictly positive finite weights and no self-loops.
/// Each edge is stored once and is traversable in both directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    #[serde(skip)]
    adj: Vec<Vec<(VertexId, EdgeId)>>,
}

impl WeightedGraph {
    /// Builds a graph, collapsing parallel edges to the minimum weight.
    /// Edge ids follow the order of first appearance of each vertex pair.
    pub fn new<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId, f64)>,
    {
        let mut index: std::collections::HashMap<(VertexId, VertexId), usize> =
            std::collections::HashMap::new();
        let mut out: Vec<Edge> = Vec::new();
        for (u, v, w) in edges {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(GraphError::VertexOutOfRange { v: x, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(GraphError::BadWeight { u, v, w });
            }
            let key = (u.min(v), u.max(v));
            match index.get(&key) {
                Some(&i) => {
                    if w < out[i].w {
                        out[i].w = w;
                    }
                }
                None => {
                    index.insert(key, out.len());
                    out.push(Edge { u, v, w });
                }
            }
        }
        let mut g = WeightedGraph { n, edges: out, adj: Vec::new() };
        g.rebuild_adjacency();
        Ok(g)
    }

    pub fn empty(n: usize) -> Self {
        WeightedGraph { n, edges: Vec::new(), adj: vec![Vec::new(); n] }
    }

    /// Restores adjacency lists after deserialization.
    pub fn rebuild_adjacency(&mut self) {
        let mut adj = vec![Vec::new(); self.n];
        for (id, e) in self.edges.iter().enumerate() {
            adj[e.u as usize].push((e.v, id as EdgeId));
            adj[e.v as usize].push((e.u, id as EdgeId));
        }
        self.adj = adj;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id as usize]
    }

    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adj[v as usize]
    }

    /// Id of the edge joining `u` and `v`, if any.
    pub fn find_edge(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        let (a, b) = if self.adj[u as usize].len() <= self.adj[v as usize].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adj[a as usize].iter().find(|&&(x, _)| x == b).map(|&(_, e)| e)
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.w).reduce(f64::min)
    }

    /// Connected component label per vertex, labels numbered by smallest member.
    pub fn components(&self) -> Vec<u32> {
        let mut comp = vec![u32::MAX; self.n];
        let mut next = 0u32;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if comp[s] != u32::MAX {
                continue;
            }
            comp[s] = next;
            stack.push(s as VertexId);
            while let Some(x) = stack.pop() {
                for &(y, _) in self.neighbors(x) {
                    if comp[y as usize] == u32::MAX {
                        comp[y as usize] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// Ratio of the largest finite distance to the smallest positive one.
    /// Returns 1 for graphs without edges.
    pub fn aspect_ratio(&self) -> f64 {
        let Some(wmin) = self.min_weight() else { return 1.0 };
        let diam = all_pairs(self)
            .iter()
            .flat_map(|row| row.iter().copied())
            .filter(|d| d.is_finite())
            .fold(0.0f64, f64::max);
        (diam / wmin).max(1.0)
    }
}
