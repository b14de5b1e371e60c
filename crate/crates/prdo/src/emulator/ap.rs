//! Emulator from sparse covers of all balls at geometrically growing radii.
//! A query finds the smallest radius whose home cluster of `v` holds `u`,
//! searching only the window allowed by a coarse distance estimate, and
//! answers with the cluster-tree path.

use serde::{Deserialize, Serialize};

use super::cover::{check_cover, coarsen_cover, Cover, CoverCluster, CoverError};
use super::mn::{build_mn_hierarchy, MnHierarchy};
use super::{check_point, forest_path, EmulatorError, InteractiveEmulator, MetricGraph};
use crate::graph::{PathResult, VertexId, WeightedGraph};
use crate::oracle::QueryError;
use crate::util::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Scale {
    radius: f64,
    clusters: Vec<CoverCluster>,
    /// Cluster holding the ball of each vertex.
    home: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApEmulator {
    pub k: u32,
    pub eps: f64,
    graph: WeightedGraph,
    /// Smallest pairwise distance; radii are `unit·(1+ε)^i`.
    unit: f64,
    scales: Vec<Scale>,
    estimate: MnHierarchy,
    used: Vec<u32>,
}

pub fn build_ap_emulator(m: &MetricGraph, k: u32, eps: f64, seed: u64) -> Result<ApEmulator, EmulatorError> {
    if k == 0 || !(eps > 0.0) {
        return Err(EmulatorError::InvalidParams(format!("k={k} eps={eps}")));
    }
    let graph = m.complete_graph();
    let n = m.len() as VertexId;
    let (unit, far) = m.extent();
    let top = if unit.is_finite() { ((far / unit).ln() / eps.ln_1p()).ceil().max(0.0) as i32 } else { -1 };
    let mut scales = Vec::new();
    for i in 0..=top {
        let radius = unit * (1.0 + eps).powi(i);
        let balls: Vec<_> = (0..n).map(|v| (v, (0..n).filter(|&u| m.d(v, u) <= radius).collect())).collect();
        let cover = coarsen_cover(&graph, &balls, k)?;
        scales.push(Scale { radius, clusters: cover.clusters, home: cover.home });
    }
    let estimate = build_mn_hierarchy(m, k, derive_seed(seed, 1))?;
    let mut used: Vec<u32> = scales
        .iter()
        .flat_map(|s| s.home.iter().flat_map(move |&h| s.clusters[h as usize].tree_edges()))
        .collect();
    used.sort_unstable();
    used.dedup();
    Ok(ApEmulator { k, eps, graph, unit, scales, estimate, used })
}

impl ApEmulator {
    pub fn restore(&mut self) {
        self.graph.rebuild_adjacency();
    }

    pub fn scale_count(&self) -> usize {
        self.scales.len()
    }

    /// Re-checks every scale's cover against the balls of its radius and
    /// returns the number of covers checked.
    pub fn check_covers(&self) -> Result<usize, CoverError> {
        let n = self.graph.n();
        for s in &self.scales {
            let mut balls: Vec<(VertexId, Vec<VertexId>)> = (0..n as VertexId).map(|v| (v, vec![v])).collect();
            for e in self.graph.edges().iter().filter(|e| e.w <= s.radius) {
                balls[e.u as usize].1.push(e.v);
                balls[e.v as usize].1.push(e.u);
            }
            let cover = Cover { clusters: s.clusters.clone(), home: s.home.clone() };
            check_cover(&self.graph, &balls, &cover, self.k)?;
        }
        Ok(self.scales.len())
    }

    fn home(&self, i: usize, v: VertexId) -> &CoverCluster {
        let s = &self.scales[i];
        &s.clusters[s.home[v as usize] as usize]
    }

    /// Scale index answering `(u, v)`: the search keeps `u ∈ HC(v)` at the
    /// upper end and its failure just below the lower end, so the radius one
    /// step down is below `d(u,v)`.
    pub fn scale_for(&self, u: VertexId, v: VertexId) -> usize {
        self.scale_for_counted(u, v).0
    }

    /// Scale index and the number of cluster membership probes spent.
    pub fn scale_for_counted(&self, u: VertexId, v: VertexId) -> (usize, usize) {
        let top = self.scales.len() - 1;
        let est = self.estimate.estimate(u, v);
        let c = self.estimate.estimate_ratio();
        let step = self.eps.ln_1p();
        let idx = |x: f64| (x / self.unit).ln() / step;
        let mut lo = idx(est / c).floor().clamp(0.0, top as f64) as usize;
        let mut hi = (idx(est).ceil().max(0.0) as usize).min(top);
        let mut probes = 1;
        if !self.home(hi, v).contains(u) {
            hi = top;
        }
        lo = lo.min(hi);
        while lo < hi {
            let mid = (lo + hi) / 2;
            probes += 1;
            if self.home(mid, v).contains(u) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        (lo, probes)
    }
}

impl InteractiveEmulator for ApEmulator {
    fn points(&self) -> usize {
        self.graph.n()
    }

    fn query(&self, u: VertexId, v: VertexId) -> Result<PathResult, QueryError> {
        check_point(self.points(), u)?;
        check_point(self.points(), v)?;
        if u == v {
            return Ok(PathResult::trivial(u));
        }
        let c = self.home(self.scale_for(u, v), v);
        if !c.contains(u) {
            return Err(QueryError::Unreachable(u, v));
        }
        let parent = |x: VertexId| c.parent(x).map(|(p, e)| (p, e, self.graph.edge(e).w));
        forest_path(u, v, parent, |x| c.depth(x)).ok_or(QueryError::Unreachable(u, v))
    }

    fn edge(&self, i: u32) -> (VertexId, VertexId, f64) {
        let e = self.graph.edge(i);
        (e.u, e.v, e.w)
    }

    fn used_edges(&self) -> Vec<u32> {
        self.used.clone()
    }

    fn declared_stretch(&self) -> f64 {
        4.0 * (1.0 + self.eps) * self.k as f64
    }

    /// Per scale a home pointer per vertex and a parent and depth per cluster
    /// member, plus the estimate structure.
    fn size_words(&self) -> usize {
        self.scales
            .iter()
            .map(|s| s.home.len() + 2 * s.clusters.iter().map(|c| c.members.len()).sum::<usize>())
            .sum::<usize>()
            + self.estimate.size_words()
    }
}
