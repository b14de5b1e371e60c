//! Distance oracle over the lowest `h` levels of a Thorup–Zwick hierarchy.
//!
//! A query either reports a path of stretch `2h+1`, or two paths from the
//! endpoints to their level-`h` pivots, each at most `h·d(u,v)` long. The
//! level is located by a binary search over even indices, guided by a
//! per-vertex tree of interval maxima of the pivot-distance gaps
//! `Δ_u(i) = d(u,p_{i+2}(u)) - d(u,p_i(u))`.
//!
//! In complete mode the hierarchy has no level above `h`, the top bunch is
//! the whole top level, and every query ends in a direct path of stretch
//! `2h+1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, PathResult, VertexId, WeightedGraph};
use crate::hierarchy::{build_hierarchy, bunches_upto, BunchTable, Hierarchy, NONE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartialTzError {
    #[error("need 1 <= h < k, got h={h}, k={k}")]
    BadLevels { h: usize, k: u32 },
    #[error("pivot distances must be nondecreasing (level {0})")]
    NonMonotone(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeNode {
    pub lo: u16,
    pub hi: u16,
    /// Even index in `[lo, mid-2]` with the largest gap; unused in leaves.
    pub j: u16,
    pub left: u32,
    pub right: u32,
}

/// Binary tree over even-endpoint intervals of `[0, top]`; node 0 is the root.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MaxInRangeTree {
    pub nodes: Vec<RangeNode>,
}

/// Split point of `[lo, hi]`: the even one of `(lo+hi)/2 - 1` and
/// `(lo+hi)/2`, or `hi` when that would leave the left range empty.
pub fn split_point(lo: usize, hi: usize) -> usize {
    let s = (lo + hi) / 2;
    let mid = if s % 2 == 0 { s } else { s - 1 };
    if mid == lo {
        hi
    } else {
        mid
    }
}

/// Tree for pivot distances `dists[0..=top]` with `top` even. Ties in the
/// gap maximum go to the smallest index.
pub fn build_max_in_range_tree(dists: &[f64]) -> Result<MaxInRangeTree, PartialTzError> {
    if let Some(i) = (1..dists.len()).find(|&i| dists[i] < dists[i - 1]) {
        return Err(PartialTzError::NonMonotone(i));
    }
    let top = dists.len().saturating_sub(1);
    debug_assert!(top % 2 == 0, "search range must end on an even index");
    let mut t = MaxInRangeTree::default();
    grow(&mut t, dists, 0, top);
    Ok(t)
}

fn grow(t: &mut MaxInRangeTree, d: &[f64], lo: usize, hi: usize) -> u32 {
    let idx = t.nodes.len() as u32;
    t.nodes.push(RangeNode { lo: lo as u16, hi: hi as u16, j: lo as u16, left: NONE, right: NONE });
    if lo == hi {
        return idx;
    }
    let mid = split_point(lo, hi);
    let gap = |x: usize| d[x + 2] - d[x];
    let mut j = lo;
    for x in (lo..=mid - 2).step_by(2) {
        if gap(x) > gap(j) {
            j = x;
        }
    }
    let left = grow(t, d, lo, j);
    let right = grow(t, d, mid, hi);
    t.nodes[idx as usize] = RangeNode { lo: lo as u16, hi: hi as u16, j: j as u16, left, right };
    idx
}

impl MaxInRangeTree {
    pub fn depth(&self) -> usize {
        fn go(t: &MaxInRangeTree, i: u32) -> usize {
            let n = &t.nodes[i as usize];
            if n.lo == n.hi {
                0
            } else {
                1 + go(t, n.left).max(go(t, n.right))
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            go(self, 0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PartialAnswer {
    /// A `u`-`v` path.
    Direct(PathResult),
    /// Paths `u → p_h(u)` and `v → p_h(v)`.
    Escape { from_u: PathResult, from_v: PathResult },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialTz {
    pub k: u32,
    /// Levels `0..=h` are searched; `A_h` is the escape set.
    pub h: usize,
    pub complete: bool,
    /// Last even index the search can land on.
    search_top: usize,
    hier: Hierarchy,
    bunches: BunchTable,
    trees: Vec<MaxInRangeTree>,
}

/// Oracle over levels `0..=h` of a hierarchy with `q_i = n^{-1/k}`; odd `h`
/// is raised to the next even value.
pub fn build_partial_tz(g: &WeightedGraph, k: u32, h: usize, seed: u64) -> Result<PartialTz, PartialTzError> {
    if h < 1 || h >= k as usize {
        return Err(PartialTzError::BadLevels { h, k });
    }
    let h = h + h % 2;
    let q = (g.n().max(1) as f64).powf(-1.0 / k as f64);
    // One level above h is sampled so that B_h(v) is cut at p_{h+1}(v).
    let hier = build_hierarchy(g, &vec![q; h + 1], seed);
    let bunches = bunches_upto(&hier, g, 1.0, h);
    assemble(k, h, false, h, hier, bunches)
}

/// Full oracle with `k` levels and stretch `2k-1`.
pub fn build_complete_tz(g: &WeightedGraph, k: u32, seed: u64) -> PartialTz {
    let k = k.max(1);
    let q = (g.n().max(1) as f64).powf(-1.0 / k as f64);
    let hier = build_hierarchy(g, &vec![q; k as usize - 1], seed);
    let h = k as usize - 1;
    let bunches = bunches_upto(&hier, g, 1.0, h);
    assemble(k, h, true, h - h % 2, hier, bunches).expect("pivot distances are monotone")
}

fn assemble(
    k: u32,
    h: usize,
    complete: bool,
    search_top: usize,
    hier: Hierarchy,
    bunches: BunchTable,
) -> Result<PartialTz, PartialTzError> {
    let trees = (0..hier.n() as VertexId)
        .map(|u| {
            let d: Vec<f64> = (0..=search_top).map(|i| hier.pivot_dist(i, u)).collect();
            build_max_in_range_tree(&d)
        })
        .collect::<Result<_, _>>()?;
    Ok(PartialTz { k, h, complete, search_top, hier, bunches, trees })
}

impl PartialTz {
    pub fn hierarchy(&self) -> &Hierarchy {
        &self.hier
    }

    pub fn bunch_table(&self) -> &BunchTable {
        &self.bunches
    }

    pub fn tree(&self, u: VertexId) -> &MaxInRangeTree {
        &self.trees[u as usize]
    }

    pub fn search_top(&self) -> usize {
        self.search_top
    }

    /// The escape set `A_h`.
    pub fn escape_set(&self) -> &[VertexId] {
        self.hier.level(self.h)
    }

    fn pivot(&self, i: usize, v: VertexId) -> VertexId {
        self.hier.pivot(i, v).map_or(NONE, |p| p.0)
    }

    /// `p_i(u) ∈ B_i(v)`, or `p_{i+1}(v) ∈ B_{i+1}(u)` when level `i+1` is searched.
    pub fn q(&self, u: VertexId, v: VertexId, i: usize) -> bool {
        let a = self.pivot(i, u);
        if a != NONE && self.bunches.member(i, v, a).is_some() {
            return true;
        }
        if i < self.h {
            let b = self.pivot(i + 1, v);
            return b != NONE && self.bunches.member(i + 1, u, b).is_some();
        }
        false
    }

    /// `d(u, p_i(u)) <= i·d(u,v)`; needs the true distance.
    pub fn p(&self, u: VertexId, i: usize, d_uv: f64) -> bool {
        self.hier.pivot_dist(i, u) <= i as f64 * d_uv
    }

    /// `(P(u,v,i), Q(u,v,i))`.
    pub fn predicates(&self, u: VertexId, v: VertexId, i: usize, d_uv: f64) -> (bool, bool) {
        (self.p(u, i, d_uv), self.q(u, v, i))
    }

    pub fn gap(&self, u: VertexId, i: usize) -> f64 {
        self.hier.pivot_dist(i + 2, u) - self.hier.pivot_dist(i, u)
    }

    /// Descends `T(u)` and returns the leaf index, whether `accept` held there,
    /// and the ranges visited.
    pub(crate) fn search<F>(&self, u: VertexId, v: VertexId, evals: &mut usize, mut accept: F) -> (usize, bool, Vec<(usize, usize)>)
    where
        F: FnMut(usize, &mut usize) -> bool,
    {
        let t = &self.trees[u as usize];
        let mut node = t.nodes[0];
        let mut visited = vec![(node.lo as usize, node.hi as usize)];
        while node.lo != node.hi {
            *evals += 1;
            node = if self.q(u, v, node.j as usize) { t.nodes[node.left as usize] } else { t.nodes[node.right as usize] };
            visited.push((node.lo as usize, node.hi as usize));
        }
        let i = node.lo as usize;
        let ok = accept(i, evals);
        (i, ok, visited)
    }

    /// Leaf acceptance used in production: `Q` alone, and never at an
    /// escape index.
    fn leaf_q(&self, u: VertexId, v: VertexId, i: usize, evals: &mut usize) -> bool {
        if !self.complete && i == self.h {
            return false;
        }
        *evals += 1;
        self.q(u, v, i)
    }

    /// Path from `u` to `v` through `p_i(u)` or `p_{i+1}(v)`, given `Q(u,v,i)`.
    pub(crate) fn direct(&self, g: &WeightedGraph, u: VertexId, v: VertexId, i: usize) -> PathResult {
        let a = self.pivot(i, u);
        if a != NONE && self.bunches.member(i, v, a).is_some() {
            let mut p = self.hier.pivot_path(g, i, u).expect("pivot exists");
            p.extend(&self.bunches.path_to_center(g, a, v).expect("v lies in C(a)").reversed());
            return p;
        }
        let b = self.pivot(i + 1, v);
        let mut p = self.bunches.path_to_center(g, b, u).expect("u lies in C(b)");
        p.extend(&self.hier.pivot_path(g, i + 1, v).expect("pivot exists").reversed());
        p
    }

    pub fn partial_query(&self, g: &WeightedGraph, u: VertexId, v: VertexId) -> PartialAnswer {
        self.partial_query_counted(g, u, v).0
    }

    /// Answer plus the number of `Q` evaluations spent.
    pub fn partial_query_counted(&self, g: &WeightedGraph, u: VertexId, v: VertexId) -> (PartialAnswer, usize) {
        let mut evals = 0;
        if u == v {
            return (PartialAnswer::Direct(PathResult::trivial(u)), 0);
        }
        let (i, ok, _) = self.search(u, v, &mut evals, |i, e| self.leaf_q(u, v, i, e));
        if ok {
            return (PartialAnswer::Direct(self.direct(g, u, v, i)), evals);
        }
        let (i, ok, _) = self.search(v, u, &mut evals, |i, e| self.leaf_q(v, u, i, e));
        if ok {
            return (PartialAnswer::Direct(self.direct(g, v, u, i).reversed()), evals);
        }
        let from_u = self.hier.pivot_path(g, self.h, u).expect("every vertex has a level-h pivot");
        let from_v = self.hier.pivot_path(g, self.h, v).expect("every vertex has a level-h pivot");
        (PartialAnswer::Escape { from_u, from_v }, evals)
    }

    /// Edges any answer may use: pivot paths of levels `1..=h` and cluster trees.
    pub fn edge_set(&self) -> Vec<EdgeId> {
        let mut es = Vec::new();
        for i in 1..=self.h.min(self.hier.l() - 1) {
            es.extend((0..self.hier.n() as VertexId).filter_map(|v| self.hier.pivot_edge(i, v)));
        }
        for a in 0..self.hier.n() as VertexId {
            es.extend(self.bunches.cluster(a).iter().filter(|m| m.edge != NONE).map(|m| m.edge));
        }
        es.sort_unstable();
        es.dedup();
        es
    }

    /// Pivot maps (pivot and next edge per vertex and level), bunches and
    /// cluster pointers (id and distance or next hop), and three words per
    /// tree node.
    pub fn size_words(&self) -> usize {
        let n = self.hier.n();
        let tree_nodes: usize = self.trees.iter().map(|t| t.nodes.len()).sum();
        let clusters: usize = (0..n as VertexId).map(|a| self.bunches.cluster(a).len()).sum();
        2 * n * self.h + 2 * self.bunches.total_size() + 2 * clusters + 3 * tree_nodes
    }
}
