//! Clusterings with shallow rooted trees whose edges are dominated by the
//! graph edges around them, the graph of clusters, and the oracle that
//! answers on the cluster graph and stitches tree paths between witnesses.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Prdo, QueryOps};
use crate::graph::{EdgeId, PathEdge, PathResult, VertexId, WeightedGraph};
use crate::hierarchy::NONE;
use crate::oracle::{check_vertex, InteractiveOracle, QueryError};
use crate::util::le_tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("cluster size parameter must be at least 1")]
    ZeroT,
    #[error("vertex {0} has a broken parent pointer")]
    Structure(VertexId),
    #[error("depth {depth} exceeds {bound}")]
    Depth { depth: u32, bound: u32 },
    #[error("{clusters} clusters exceed n/t = {bound}")]
    Count { clusters: usize, bound: usize },
    #[error("tree edge of weight {tree} above {w} on edge {edge}")]
    Domination { edge: EdgeId, tree: f64, w: f64 },
}

/// Every vertex has a parent edge toward its cluster root. Cluster ids
/// follow the sorted order of the roots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StretchFriendlyPartition {
    pub t: usize,
    /// `NONE` at roots.
    parent_edge: Vec<EdgeId>,
    roots: Vec<VertexId>,
    cluster: Vec<u32>,
    depth: Vec<u32>,
}

/// A group of vertices frozen together: a core that reached size `t`, or a
/// smaller component hung below a frozen vertex.
struct Piece {
    parent: u32,
    root: VertexId,
    size: usize,
}

struct Builder<'a> {
    g: &'a WeightedGraph,
    /// Forest edges inside unfrozen components.
    adj: Vec<Vec<(VertexId, EdgeId)>>,
    comp: Vec<u32>,
    members: Vec<Vec<VertexId>>,
    piece: Vec<u32>,
    pieces: Vec<Piece>,
    parent_edge: Vec<EdgeId>,
    /// Frozen vertices, every parent before its children.
    order: Vec<VertexId>,
}

impl Builder<'_> {
    /// Hop-BFS over the unfrozen component of `s`: visit order and parent edges.
    fn bfs(&self, s: VertexId) -> (Vec<VertexId>, BTreeMap<VertexId, (VertexId, EdgeId)>) {
        let mut seen = BTreeMap::new();
        seen.insert(s, (NONE, NONE));
        let mut out = vec![s];
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            for &(y, e) in &self.adj[x as usize] {
                if self.piece[y as usize] == NONE && !seen.contains_key(&y) {
                    seen.insert(y, (x, e));
                    out.push(y);
                    q.push_back(y);
                }
            }
        }
        (out, seen)
    }

    /// Freezes the component of `root` as a piece rooted there.
    fn freeze(&mut self, root: VertexId, parent: u32, via: EdgeId) {
        let (order, tree) = self.bfs(root);
        let id = self.pieces.len() as u32;
        for &x in &order {
            self.piece[x as usize] = id;
            self.parent_edge[x as usize] = tree[&x].1;
        }
        self.parent_edge[root as usize] = via;
        self.pieces.push(Piece { parent, root, size: order.len() });
        self.order.extend(order);
    }

    /// Freezes a component as a core rooted at its tree center.
    fn freeze_core(&mut self, any: VertexId) {
        let (order, _) = self.bfs(any);
        let (far, tree) = self.bfs(*order.last().unwrap());
        let end = *far.last().unwrap();
        let mut diam = vec![end];
        while let Some(&(p, _)) = tree.get(diam.last().unwrap()).filter(|p| p.0 != NONE) {
            diam.push(p);
        }
        self.freeze(diam[diam.len() / 2], NONE, NONE);
    }

    fn merge(&mut self, u: VertexId, v: VertexId, e: EdgeId) -> usize {
        let (mut a, mut b) = (self.comp[u as usize], self.comp[v as usize]);
        if self.members[a as usize].len() < self.members[b as usize].len() {
            std::mem::swap(&mut a, &mut b);
        }
        let moved = std::mem::take(&mut self.members[b as usize]);
        for &x in &moved {
            self.comp[x as usize] = a;
        }
        self.members[a as usize].extend(moved);
        self.adj[u as usize].push((v, e));
        self.adj[v as usize].push((u, e));
        self.members[a as usize].len()
    }
}

/// Scans edges by increasing weight over a spanning forest. Components
/// merge until they reach `t` vertices and freeze around their center; a
/// component touching a frozen vertex hangs below it. Each hung piece whose
/// unsplit subtree reaches `t` vertices is then split off as its own
/// cluster, which keeps depth below `2t` and every cluster at `t` vertices
/// or more in a connected graph.
pub fn build_stretch_friendly_partition(g: &WeightedGraph, t: usize) -> Result<StretchFriendlyPartition, PartitionError> {
    if t == 0 {
        return Err(PartitionError::ZeroT);
    }
    let n = g.n();
    let mut b = Builder {
        g,
        adj: vec![Vec::new(); n],
        comp: (0..n as u32).collect(),
        members: (0..n as VertexId).map(|v| vec![v]).collect(),
        piece: vec![NONE; n],
        pieces: Vec::new(),
        parent_edge: vec![NONE; n],
        order: Vec::new(),
    };
    if t == 1 {
        for v in 0..n as VertexId {
            b.freeze(v, NONE, NONE);
        }
    }
    let mut by_weight: Vec<EdgeId> = (0..g.m() as EdgeId).collect();
    by_weight.sort_by(|&x, &y| g.edge(x).w.total_cmp(&g.edge(y).w).then(x.cmp(&y)));
    for e in by_weight {
        let ed = *b.g.edge(e);
        let (pu, pv) = (b.piece[ed.u as usize], b.piece[ed.v as usize]);
        match (pu != NONE, pv != NONE) {
            (true, true) => {}
            (true, false) => b.freeze(ed.v, pu, e),
            (false, true) => b.freeze(ed.u, pv, e),
            (false, false) => {
                if b.comp[ed.u as usize] != b.comp[ed.v as usize] && b.merge(ed.u, ed.v, e) >= t {
                    b.freeze_core(ed.u);
                }
            }
        }
    }
    for v in 0..n as VertexId {
        if b.piece[v as usize] == NONE {
            b.freeze_core(v);
        }
    }

    // Pieces are created after their parents, so a reverse scan sees every
    // child before its parent.
    let mut open: Vec<usize> = b.pieces.iter().map(|p| p.size).collect();
    let mut parent_edge = b.parent_edge;
    let mut roots = Vec::new();
    for i in (0..b.pieces.len()).rev() {
        let p = &b.pieces[i];
        if p.parent == NONE || open[i] >= t {
            parent_edge[p.root as usize] = NONE;
            roots.push(p.root);
        } else {
            open[p.parent as usize] += open[i];
        }
    }
    roots.sort_unstable();
    let mut cluster = vec![NONE; n];
    let mut depth = vec![0; n];
    for &x in &b.order {
        let e = parent_edge[x as usize];
        if e == NONE {
            cluster[x as usize] = roots.binary_search(&x).unwrap() as u32;
        } else {
            let p = g.edge(e).other(x);
            cluster[x as usize] = cluster[p as usize];
            depth[x as usize] = depth[p as usize] + 1;
        }
    }
    Ok(StretchFriendlyPartition { t, parent_edge, roots, cluster, depth })
}

impl StretchFriendlyPartition {
    pub fn n(&self) -> usize {
        self.cluster.len()
    }

    pub fn cluster_count(&self) -> usize {
        self.roots.len()
    }

    pub fn cluster_of(&self, v: VertexId) -> u32 {
        self.cluster[v as usize]
    }

    pub fn root(&self, c: u32) -> VertexId {
        self.roots[c as usize]
    }

    pub fn depth(&self, v: VertexId) -> u32 {
        self.depth[v as usize]
    }

    pub fn parent_edge(&self, v: VertexId) -> Option<EdgeId> {
        let e = self.parent_edge[v as usize];
        (e != NONE).then_some(e)
    }

    pub fn max_depth(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Measured depth constant `max depth / t`.
    pub fn c_t(&self) -> f64 {
        self.max_depth() as f64 / self.t as f64
    }

    pub fn tree_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.parent_edge.iter().copied().filter(|&e| e != NONE)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub clusters: usize,
    pub max_depth: u32,
    pub c_t: f64,
    pub edges_checked: usize,
}

/// Vertex `steps` levels above `v` and the heaviest tree edge on the way.
fn climb_max(g: &WeightedGraph, p: &StretchFriendlyPartition, mut v: VertexId, steps: u32) -> (VertexId, f64) {
    let mut m: f64 = 0.0;
    for _ in 0..steps {
        let e = g.edge(p.parent_edge[v as usize]);
        m = m.max(e.w);
        v = e.other(v);
    }
    (v, m)
}

/// Checks parent pointers, depth at most `2t`, at most `n/t` clusters in a
/// connected graph with `n >= t`, and for every edge `(x, y)` that the tree
/// path between its endpoints (same cluster) or from each endpoint to its
/// root (different clusters) only uses edges no heavier than `w(x, y)`.
pub fn check_partition(g: &WeightedGraph, p: &StretchFriendlyPartition) -> Result<PartitionReport, PartitionError> {
    let n = g.n();
    if p.n() != n {
        return Err(PartitionError::Structure(0));
    }
    for v in 0..n as VertexId {
        let c = p.cluster_of(v);
        match p.parent_edge(v) {
            None => {
                if p.depth(v) != 0 || p.roots.get(c as usize) != Some(&v) {
                    return Err(PartitionError::Structure(v));
                }
            }
            Some(e) => {
                let ed = g.edge(e);
                if ed.u != v && ed.v != v {
                    return Err(PartitionError::Structure(v));
                }
                let up = ed.other(v);
                if p.cluster_of(up) != c || p.depth(up) + 1 != p.depth(v) {
                    return Err(PartitionError::Structure(v));
                }
            }
        }
    }
    let bound = 2 * p.t as u32;
    if p.max_depth() > bound {
        return Err(PartitionError::Depth { depth: p.max_depth(), bound });
    }
    if n >= p.t && g.is_connected() && p.cluster_count() > n / p.t {
        return Err(PartitionError::Count { clusters: p.cluster_count(), bound: n / p.t });
    }
    let root_max: Vec<f64> = (0..n as VertexId).map(|v| climb_max(g, p, v, p.depth(v)).1).collect();
    for (id, e) in g.edges().iter().enumerate() {
        let tree = if p.cluster_of(e.u) == p.cluster_of(e.v) {
            let (du, dv) = (p.depth(e.u), p.depth(e.v));
            let (mut a, ma) = climb_max(g, p, e.u, du.saturating_sub(dv));
            let (mut b, mb) = climb_max(g, p, e.v, dv.saturating_sub(du));
            let mut m = ma.max(mb);
            while a != b {
                let (x, mx) = climb_max(g, p, a, 1);
                let (y, my) = climb_max(g, p, b, 1);
                (a, b, m) = (x, y, m.max(mx).max(my));
            }
            m
        } else {
            root_max[e.u as usize].max(root_max[e.v as usize])
        };
        if !le_tol(tree, e.w) {
            return Err(PartitionError::Domination { edge: id as EdgeId, tree, w: e.w });
        }
    }
    Ok(PartitionReport { clusters: p.cluster_count(), max_depth: p.max_depth(), c_t: p.c_t(), edges_checked: g.m() })
}

/// Cluster graph with one edge per adjacent cluster pair, weighted by the
/// lightest graph edge between them, which is kept as its witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterGraph {
    pub graph: WeightedGraph,
    pub witness: Vec<EdgeId>,
}

pub fn cluster_graph(g: &WeightedGraph, p: &StretchFriendlyPartition) -> ClusterGraph {
    let mut best: BTreeMap<(u32, u32), (f64, EdgeId)> = BTreeMap::new();
    for (id, e) in g.edges().iter().enumerate() {
        let (a, b) = (p.cluster_of(e.u), p.cluster_of(e.v));
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        let cand = (e.w, id as EdgeId);
        best.entry(key).and_modify(|x| if cand < *x { *x = cand }).or_insert(cand);
    }
    let graph = WeightedGraph::new(p.cluster_count(), best.iter().map(|(&(a, b), &(w, _))| (a, b, w)).collect::<Vec<_>>())
        .expect("cluster ids are in range and weights positive");
    ClusterGraph { graph, witness: best.values().map(|x| x.1).collect() }
}

/// Oracle over the cluster graph whose answers are stitched back into the
/// graph through tree paths and witness edges. In ultra-sparse form only the
/// parent edges are kept per vertex; cluster and depth are found by walking
/// to the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionedPrdo {
    pub t: usize,
    pub ultra: bool,
    parent_edge: Vec<EdgeId>,
    roots: Vec<VertexId>,
    /// Empty in ultra-sparse form.
    cluster: Vec<u32>,
    /// Empty in ultra-sparse form.
    depth: Vec<u32>,
    pub max_depth: u32,
    pub cluster_graph: ClusterGraph,
    /// Sorted cluster-graph edges the inner oracle may use.
    used: Vec<EdgeId>,
    pub inner: Box<Prdo>,
    stretch: f64,
}

/// Partitions `g`, builds the inner oracle on the cluster graph and wraps it.
pub fn compose_with_partition<F>(g: &WeightedGraph, t: usize, inner: F) -> Result<PartitionedPrdo, super::ComposeError>
where
    F: FnOnce(&WeightedGraph) -> Result<Prdo, super::ComposeError>,
{
    let p = build_stretch_friendly_partition(g, t)?;
    check_partition(g, &p)?;
    let cg = cluster_graph(g, &p);
    let inner = inner(&cg.graph)?;
    let d = p.max_depth();
    let stretch = 2.0 * d as f64 + (2 * d + 1) as f64 * inner.declared_stretch();
    Ok(PartitionedPrdo {
        t,
        ultra: false,
        parent_edge: p.parent_edge,
        roots: p.roots,
        cluster: p.cluster,
        depth: p.depth,
        max_depth: d,
        used: inner.edge_set(),
        cluster_graph: cg,
        inner: Box::new(inner),
        stretch,
    })
}

/// The same oracle without per-vertex cluster ids and depths.
pub fn compose_ultra_sparse<F>(g: &WeightedGraph, t: usize, inner: F) -> Result<PartitionedPrdo, super::ComposeError>
where
    F: FnOnce(&WeightedGraph) -> Result<Prdo, super::ComposeError>,
{
    compose_with_partition(g, t, inner).map(PartitionedPrdo::into_ultra)
}

impl PartitionedPrdo {
    pub fn into_ultra(mut self) -> Self {
        self.ultra = true;
        self.cluster = Vec::new();
        self.depth = Vec::new();
        self
    }

    pub fn cluster_count(&self) -> usize {
        self.roots.len()
    }

    /// The partition behind the wrap, with cluster ids and depths recovered
    /// by walking when they were dropped.
    pub fn partition(&self, g: &WeightedGraph) -> StretchFriendlyPartition {
        let mut ops = QueryOps::default();
        let (cluster, depth) = (0..self.parent_edge.len() as VertexId).map(|v| self.locate(g, v, &mut ops)).unzip();
        StretchFriendlyPartition {
            t: self.t,
            parent_edge: self.parent_edge.clone(),
            roots: self.roots.clone(),
            cluster,
            depth,
        }
    }

    pub fn restore(&mut self) {
        self.cluster_graph.graph.rebuild_adjacency();
        self.inner.restore();
    }

    /// Cluster and depth of `v`, walking to the root in ultra-sparse form.
    fn locate(&self, g: &WeightedGraph, v: VertexId, ops: &mut QueryOps) -> (u32, u32) {
        if !self.ultra {
            return (self.cluster[v as usize], self.depth[v as usize]);
        }
        let (mut x, mut d) = (v, 0);
        while self.parent_edge[x as usize] != NONE {
            x = g.edge(self.parent_edge[x as usize]).other(x);
            d += 1;
        }
        ops.tree_steps += d as usize;
        (self.roots.binary_search(&x).unwrap() as u32, d)
    }

    /// Tree path between two vertices of one cluster given their depths.
    fn tree_path(&self, g: &WeightedGraph, u: VertexId, du: u32, v: VertexId, dv: u32, ops: &mut QueryOps) -> PathResult {
        let mut up = PathResult::trivial(u);
        let mut down = PathResult::trivial(v);
        let (mut a, mut da, mut b, mut db) = (u, du, v, dv);
        while a != b {
            let (x, dx, side) = if da >= db { (&mut a, &mut da, &mut up) } else { (&mut b, &mut db, &mut down) };
            let e = self.parent_edge[*x as usize];
            let ed = g.edge(e);
            *x = ed.other(*x);
            *dx -= 1;
            side.push(PathEdge::Real(e), *x, ed.w);
            ops.tree_steps += 1;
        }
        up.extend(&down.reversed());
        up
    }

    pub fn query_counted(&self, g: &WeightedGraph, u: VertexId, v: VertexId, ops: &mut QueryOps) -> Result<PathResult, QueryError> {
        check_vertex(g, u)?;
        check_vertex(g, v)?;
        let (cu, du) = self.locate(g, u, ops);
        let (cv, dv) = self.locate(g, v, ops);
        if cu == cv {
            return Ok(self.tree_path(g, u, du, v, dv, ops));
        }
        let h = &self.cluster_graph.graph;
        let route = self.inner.query_counted(h, cu, cv, ops)?;
        let (mut out, mut at, mut d_at) = (PathResult::trivial(u), u, du);
        for (i, step) in route.edges.iter().enumerate() {
            let PathEdge::Real(he) = *step else { unreachable!("cluster-graph answers use real edges") };
            let e = self.cluster_graph.witness[he as usize];
            let ed = g.edge(e);
            let (x, y) = if self.locate(g, ed.u, ops).0 == route.vertices[i] { (ed.u, ed.v) } else { (ed.v, ed.u) };
            let (dx, dy) = (self.locate(g, x, ops).1, self.locate(g, y, ops).1);
            out.extend(&self.tree_path(g, at, d_at, x, dx, ops));
            out.push(PathEdge::Real(e), y, ed.w);
            ops.splices += 1;
            (at, d_at) = (y, dy);
        }
        out.extend(&self.tree_path(g, at, d_at, v, dv, ops));
        Ok(out)
    }
}

impl InteractiveOracle for PartitionedPrdo {
    fn query(&self, g: &WeightedGraph, u: VertexId, v: VertexId) -> Result<PathResult, QueryError> {
        self.query_counted(g, u, v, &mut QueryOps::default())
    }

    /// `2D + (2D+1)·α` for maximum tree depth `D` and inner stretch `α`.
    fn declared_stretch(&self) -> f64 {
        self.stretch
    }

    /// Inner oracle, one witness per usable cluster-graph edge, the root
    /// list and the depth bound, plus per vertex the parent edge and, unless
    /// ultra-sparse, the cluster id and depth.
    fn size_words(&self) -> usize {
        let per_vertex = if self.ultra { 1 } else { 3 };
        self.inner.size_words() + self.used.len() + self.roots.len() + 1 + per_vertex * self.parent_edge.len()
    }

    fn edge_set(&self) -> Vec<EdgeId> {
        let mut es: Vec<EdgeId> = self.parent_edge.iter().copied().filter(|&e| e != NONE).collect();
        es.extend(self.used.iter().map(|&he| self.cluster_graph.witness[he as usize]));
        es.sort_unstable();
        es.dedup();
        es
    }
}
