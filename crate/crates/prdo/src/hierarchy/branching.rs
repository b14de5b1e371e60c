//! Branching events among chosen shortest paths.
//!
//! Two paths branch at a shared vertex `x` when their edges incident to `x`
//! differ. Events are counted once per unordered pair of paths.

use std::collections::HashMap;

use super::{BunchTable, Hierarchy};
use crate::graph::{dijkstra_sssp, EdgeId, VertexId, WeightedGraph};

const NO_EDGE: EdgeId = EdgeId::MAX;

/// Number of (unordered path pair, vertex) branching events among the chosen
/// shortest paths of `pairs`. Pairs are deduplicated up to orientation and
/// pairs in different components are ignored.
pub fn count_branching_events(g: &WeightedGraph, pairs: &[(VertexId, VertexId)]) -> u64 {
    let mut norm: Vec<(VertexId, VertexId)> =
        pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    norm.sort_unstable();
    norm.dedup();
    // Per vertex: how many paths visit it, and how many with each incident-edge signature.
    let mut visits: HashMap<VertexId, u64> = HashMap::new();
    let mut by_sig: HashMap<(VertexId, EdgeId, EdgeId), u64> = HashMap::new();
    let mut i = 0;
    while i < norm.len() {
        let src = norm[i].0;
        let t = dijkstra_sssp(g, src);
        while i < norm.len() && norm[i].0 == src {
            let (_, dst) = norm[i];
            i += 1;
            let Some(p) = t.path_to_source(g, dst) else { continue };
            let es: Vec<EdgeId> = p.real_edges().collect();
            for (j, &x) in p.vertices.iter().enumerate() {
                let before = if j > 0 { es[j - 1] } else { NO_EDGE };
                let after = es.get(j).copied().unwrap_or(NO_EDGE);
                let sig = (x, before.min(after), before.max(after));
                *visits.entry(x).or_default() += 1;
                *by_sig.entry(sig).or_default() += 1;
            }
        }
    }
    let pairs_of = |c: u64| c * c.saturating_sub(1) / 2;
    let all: u64 = visits.values().map(|&c| pairs_of(c)).sum();
    let same: u64 = by_sig.values().map(|&c| pairs_of(c)).sum();
    all - same
}

/// `H^{1/2}_i`: pairs `(v, u)` with `v ∈ A_i` and `u ∈ B^{1/2}_i(v)`.
pub fn half_bunch_pairs(h: &Hierarchy, half: &BunchTable, i: usize) -> Vec<(VertexId, VertexId)> {
    let mut out = Vec::new();
    if i > half.top {
        return out;
    }
    for &v in h.level(i) {
        for &(u, _) in half.bunch(i, v) {
            out.push((v, u));
        }
    }
    out
}

/// `4 Σ_{u∈A_i} |B_i(u)|³` over full bunches.
pub fn branch_bound(h: &Hierarchy, full: &BunchTable, i: usize) -> u128 {
    h.level(i)
        .iter()
        .map(|&u| {
            let b = full.bunch(i, u).len() as u128;
            4 * b * b * b
        })
        .sum()
}
