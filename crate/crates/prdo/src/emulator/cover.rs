//! Sparse covers: merge a family of clusters into coarser clusters that
//! contain every input cluster, have bounded radius and overlap little.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{truncated_dijkstra, EdgeId, VertexId, WeightedGraph};
use crate::hierarchy::NONE;
use crate::util::le_tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("input cluster {0} is empty or disconnected from its center")]
    BadInput(usize),
    #[error("input cluster {0} is not inside its home cluster")]
    Containment(usize),
    #[error("cluster {cluster} has radius {radius} above {bound}")]
    Radius { cluster: usize, radius: f64, bound: f64 },
    #[error("vertex {v} lies in {count} clusters, above {bound}")]
    Membership { v: VertexId, count: usize, bound: f64 },
}

/// A cluster with a shortest-path tree of its induced subgraph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverCluster {
    pub center: VertexId,
    /// Sorted.
    pub members: Vec<VertexId>,
    /// Parent vertex and edge of each member; the center has `NONE`.
    parent: Vec<(VertexId, EdgeId)>,
    depth: Vec<u32>,
    pub radius: f64,
}

impl CoverCluster {
    /// Shortest-path tree of `G[members]` from `center`; `None` when some
    /// member is unreachable inside the cluster.
    pub fn with_tree(g: &WeightedGraph, center: VertexId, mut members: Vec<VertexId>) -> Option<Self> {
        members.sort_unstable();
        members.dedup();
        let inside: HashSet<VertexId> = members.iter().copied().collect();
        let reached = truncated_dijkstra(g, center, |v, _| inside.contains(&v));
        if reached.len() != members.len() {
            return None;
        }
        let mut parent = vec![(NONE, NONE); members.len()];
        let mut depth = vec![0; members.len()];
        let mut radius: f64 = 0.0;
        // Settling order puts every parent before its children.
        for r in &reached {
            let i = members.binary_search(&r.v).unwrap();
            radius = radius.max(r.dist);
            if r.edge != NONE {
                parent[i] = (r.next, r.edge);
                depth[i] = depth[members.binary_search(&r.next).unwrap()] + 1;
            }
        }
        Some(CoverCluster { center, members, parent, depth, radius })
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// Parent vertex and edge of a member, `None` at the center.
    pub fn parent(&self, v: VertexId) -> Option<(VertexId, EdgeId)> {
        let p = self.parent[self.members.binary_search(&v).ok()?];
        (p.0 != NONE).then_some(p)
    }

    pub fn depth(&self, v: VertexId) -> u32 {
        self.depth[self.members.binary_search(&v).unwrap()]
    }

    pub fn tree_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.parent.iter().filter(|p| p.1 != NONE).map(|p| p.1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub clusters: Vec<CoverCluster>,
    /// Output cluster containing each input cluster.
    pub home: Vec<u32>,
}

/// Balls `S(v, w) = {u : d(u,v) <= w}` for every vertex, centered at `v`.
pub fn neighborhood_cover(g: &WeightedGraph, w: f64) -> Vec<(VertexId, Vec<VertexId>)> {
    (0..g.n() as VertexId)
        .map(|v| (v, truncated_dijkstra(g, v, |_, d| d <= w).into_iter().map(|m| m.v).collect()))
        .collect()
}

/// Layered merging in phases. Within a phase each kernel grows by absorbing
/// every unprocessed cluster it touches while that multiplies its cluster
/// count by more than `|R|^{1/k}`; the kernel becomes an output cluster, the
/// clusters inside it are done, and the touched ones wait for a later phase.
pub fn coarsen_cover(g: &WeightedGraph, input: &[(VertexId, Vec<VertexId>)], k: u32) -> Result<Cover, CoverError> {
    let k = k.max(1);
    let mut occ: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (i, (_, s)) in input.iter().enumerate() {
        if s.is_empty() {
            return Err(CoverError::BadInput(i));
        }
        for &v in s {
            occ[v as usize].push(i);
        }
    }
    let mut alive = vec![true; input.len()];
    let mut left = input.len();
    let mut home = vec![NONE; input.len()];
    let mut clusters = Vec::new();
    while left > 0 {
        let thresh = (left as f64).powf(1.0 / k as f64);
        let mut open = alive.clone();
        for s in 0..input.len() {
            if !open[s] {
                continue;
            }
            let mut kernel = vec![s];
            let mut verts: HashSet<VertexId> = input[s].1.iter().copied().collect();
            let touched = loop {
                let mut z: Vec<usize> = verts.iter().flat_map(|&v| occ[v as usize].iter().copied()).filter(|&c| open[c]).collect();
                z.sort_unstable();
                z.dedup();
                if z.len() as f64 <= thresh * kernel.len() as f64 {
                    break z;
                }
                for &c in &z {
                    verts.extend(input[c].1.iter().copied());
                }
                kernel = z;
            };
            for c in touched {
                open[c] = false;
            }
            let id = clusters.len() as u32;
            for &c in &kernel {
                home[c] = id;
                alive[c] = false;
                left -= 1;
            }
            let cl = CoverCluster::with_tree(g, input[s].0, verts.into_iter().collect()).ok_or(CoverError::BadInput(s))?;
            clusters.push(cl);
        }
    }
    let cover = Cover { clusters, home };
    check_cover(g, input, &cover, k)?;
    Ok(cover)
}

/// Radius of `G[S]` from the center, over all input clusters.
fn input_radius(g: &WeightedGraph, input: &[(VertexId, Vec<VertexId>)]) -> Result<f64, CoverError> {
    let mut rad: f64 = 0.0;
    for (i, (c, s)) in input.iter().enumerate() {
        let cl = CoverCluster::with_tree(g, *c, s.clone()).ok_or(CoverError::BadInput(i))?;
        rad = rad.max(cl.radius);
    }
    Ok(rad)
}

/// Containment of every input cluster in its home, radius at most
/// `(2k-1)·Rad(input)`, and every vertex in at most `2k·|input|^{1/k}` clusters.
pub fn check_cover(
    g: &WeightedGraph,
    input: &[(VertexId, Vec<VertexId>)],
    cover: &Cover,
    k: u32,
) -> Result<(), CoverError> {
    for (i, (_, s)) in input.iter().enumerate() {
        let h = cover.home[i];
        if h == NONE || !s.iter().all(|&v| cover.clusters[h as usize].contains(v)) {
            return Err(CoverError::Containment(i));
        }
    }
    let bound = (2 * k - 1) as f64 * input_radius(g, input)?;
    for (i, c) in cover.clusters.iter().enumerate() {
        if !le_tol(c.radius, bound) {
            return Err(CoverError::Radius { cluster: i, radius: c.radius, bound });
        }
    }
    let cap = 2.0 * k as f64 * (input.len() as f64).powf(1.0 / k as f64);
    let mut count = vec![0usize; g.n()];
    for c in &cover.clusters {
        for &v in &c.members {
            count[v as usize] += 1;
        }
    }
    if let Some((v, &c)) = count.iter().enumerate().find(|(_, &c)| c as f64 > cap) {
        return Err(CoverError::Membership { v: v as VertexId, count: c, bound: cap });
    }
    Ok(())
}
