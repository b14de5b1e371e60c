//! Sampled level sets, pivots, bunches and the hop edges derived from them.

mod branching;

pub use branching::{branch_bound, count_branching_events, half_bunch_pairs};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{
    multi_source_dijkstra, truncated_dijkstra, ClusterMember, EdgeId, PathEdge, PathResult,
    VertexId, WeightedGraph,
};
use crate::util::rng;

pub const NONE: u32 = u32::MAX;
const RESAMPLE_ATTEMPTS: usize = 8;

/// Level sets `A_0 = V ⊇ A_1 ⊇ … ⊇ A_{l-1}` (with `A_l` empty) and, per
/// level, each vertex's nearest member of that level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hierarchy {
    pub probs: Vec<f64>,
    pub seed: u64,
    levels: Vec<Vec<VertexId>>,
    level_of: Vec<u32>,
    pivot: Vec<Vec<VertexId>>,
    pivot_dist: Vec<Vec<f64>>,
    pivot_edge: Vec<Vec<EdgeId>>,
}

/// Samples `A_{i+1}` from `A_i` with probability `probs[i]` (clamped to
/// (0,1]), so the hierarchy has `probs.len() + 1` non-empty levels.
///
/// A level that comes out empty is resampled a few times. After that, and in
/// every connected component the sample missed, the smallest id of the
/// previous level is promoted, so every vertex has a pivot at every level.
pub fn build_hierarchy(g: &WeightedGraph, probs: &[f64], seed: u64) -> Hierarchy {
    let probs: Vec<f64> = probs.iter().map(|&q| q.clamp(f64::MIN_POSITIVE, 1.0)).collect();
    let comp = g.components();
    let ncomp = comp.iter().copied().max().map_or(0, |c| c as usize + 1);
    let mut r = rng(seed, 0x4849_4552);
    let mut levels: Vec<Vec<VertexId>> = vec![(0..g.n() as VertexId).collect()];
    for &q in &probs {
        let prev = levels.last().unwrap();
        let mut next = Vec::new();
        for _ in 0..RESAMPLE_ATTEMPTS {
            next = prev.iter().copied().filter(|_| r.gen_bool(q)).collect();
            if !next.is_empty() || prev.is_empty() {
                break;
            }
        }
        let mut covered = vec![false; ncomp];
        for &v in &next {
            covered[comp[v as usize] as usize] = true;
        }
        for &v in prev {
            let c = comp[v as usize] as usize;
            if !covered[c] {
                covered[c] = true;
                next.push(v);
            }
        }
        next.sort_unstable();
        levels.push(next);
    }
    Hierarchy::from_levels(g, levels, probs, seed)
}

impl Hierarchy {
    /// Builds pivots for explicitly given nested level sets.
    pub fn from_levels(
        g: &WeightedGraph,
        mut levels: Vec<Vec<VertexId>>,
        probs: Vec<f64>,
        seed: u64,
    ) -> Self {
        for l in levels.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }
        let mut level_of = vec![0u32; g.n()];
        for (i, l) in levels.iter().enumerate().skip(1) {
            for &v in l {
                debug_assert!(level_of[v as usize] == i as u32 - 1, "levels must be nested");
                level_of[v as usize] = i as u32;
            }
        }
        let trees: Vec<_> = levels.par_iter().map(|l| multi_source_dijkstra(g, l)).collect();
        let mut pivot = Vec::new();
        let mut pivot_dist = Vec::new();
        let mut pivot_edge = Vec::new();
        for t in trees {
            pivot.push(t.nearest);
            pivot_dist.push(t.dist);
            pivot_edge.push(t.parent_edge);
        }
        Hierarchy { probs, seed, levels, level_of, pivot, pivot_dist, pivot_edge }
    }

    pub fn n(&self) -> usize {
        self.level_of.len()
    }

    /// Number of non-empty levels.
    pub fn l(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, i: usize) -> &[VertexId] {
        &self.levels[i]
    }

    /// Highest `i` with `v ∈ A_i`.
    pub fn level_of(&self, v: VertexId) -> usize {
        self.level_of[v as usize] as usize
    }

    pub fn in_level(&self, v: VertexId, i: usize) -> bool {
        self.level_of(v) >= i
    }

    /// `p_i(v)` and `d(v, p_i(v))`, or `None` if no level-i vertex is reachable.
    pub fn pivot(&self, i: usize, v: VertexId) -> Option<(VertexId, f64)> {
        let p = self.pivot[i][v as usize];
        (p != NONE).then(|| (p, self.pivot_dist[i][v as usize]))
    }

    pub fn pivot_dist(&self, i: usize, v: VertexId) -> f64 {
        self.pivot_dist[i][v as usize]
    }

    /// First edge on the chosen path from `v` toward `p_i(v)`.
    pub fn pivot_edge(&self, i: usize, v: VertexId) -> Option<EdgeId> {
        let e = self.pivot_edge[i][v as usize];
        (e != NONE).then_some(e)
    }

    /// Chosen shortest path from `v` to `p_i(v)`, by next-hop chasing.
    pub fn pivot_path(&self, g: &WeightedGraph, i: usize, v: VertexId) -> Option<PathResult> {
        self.pivot(i, v)?;
        let mut p = PathResult::trivial(v);
        let mut x = v;
        while let Some(e) = self.pivot_edge(i, x) {
            let ed = g.edge(e);
            x = ed.other(x);
            p.push(PathEdge::Real(e), x, ed.w);
        }
        Some(p)
    }

    /// `d(v, p_{i+1}(v))`, or infinity at the top level.
    pub fn bunch_threshold(&self, i: usize, v: VertexId) -> f64 {
        if i + 1 >= self.l() {
            f64::INFINITY
        } else {
            self.pivot_dist(i + 1, v)
        }
    }
}

/// Per-level bunches `B^ρ_i(v)` and the matching clusters
/// `C(a) = {v : a ∈ B^ρ_{level(a)}(v)}` with next hops toward `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BunchTable {
    pub rho: f64,
    pub top: usize,
    bunch: Vec<Vec<Vec<(VertexId, f64)>>>,
    cluster: Vec<Vec<ClusterMember>>,
}

/// Bunches of all levels.
pub fn bunches(h: &Hierarchy, g: &WeightedGraph, rho: f64) -> BunchTable {
    bunches_upto(h, g, rho, h.l() - 1)
}

/// Bunches of levels `0..=top`, one truncated search per level-`≤top` center.
/// A center `a` only belongs to bunches of level `level(a)`: any vertex of
/// `A_{i+1}` is at least `d(v, p_{i+1}(v))` away from `v`.
pub fn bunches_upto(h: &Hierarchy, g: &WeightedGraph, rho: f64, top: usize) -> BunchTable {
    let top = top.min(h.l() - 1);
    let cluster: Vec<Vec<ClusterMember>> = (0..g.n() as VertexId)
        .into_par_iter()
        .map(|a| {
            let i = h.level_of(a);
            if i > top {
                return Vec::new();
            }
            let mut members = truncated_dijkstra(g, a, |v, d| d < rho * h.bunch_threshold(i, v));
            members.sort_unstable_by_key(|m| m.v);
            members
        })
        .collect();
    let mut bunch = vec![vec![Vec::new(); g.n()]; top + 1];
    for (a, members) in cluster.iter().enumerate() {
        let i = h.level_of(a as VertexId).min(top);
        for m in members {
            bunch[i][m.v as usize].push((a as VertexId, m.dist));
        }
    }
    BunchTable { rho, top, bunch, cluster }
}

impl BunchTable {
    pub fn bunch(&self, i: usize, v: VertexId) -> &[(VertexId, f64)] {
        &self.bunch[i][v as usize]
    }

    /// `d(v, u)` if `u ∈ B_i(v)`.
    pub fn member(&self, i: usize, v: VertexId, u: VertexId) -> Option<f64> {
        let b = self.bunch(i, v);
        b.binary_search_by_key(&u, |&(x, _)| x).ok().map(|j| b[j].1)
    }

    /// `B_i(v) ∪ {p_i(v)}`.
    pub fn extended_bunch(&self, h: &Hierarchy, i: usize, v: VertexId) -> Vec<(VertexId, f64)> {
        let mut out = self.bunch(i, v).to_vec();
        if let Some((p, d)) = h.pivot(i, v) {
            if self.member(i, v, p).is_none() {
                out.push((p, d));
                out.sort_unstable_by_key(|&(x, _)| x);
            }
        }
        out
    }

    pub fn cluster(&self, a: VertexId) -> &[ClusterMember] {
        &self.cluster[a as usize]
    }

    pub fn cluster_member(&self, a: VertexId, v: VertexId) -> Option<&ClusterMember> {
        let c = self.cluster(a);
        c.binary_search_by_key(&v, |m| m.v).ok().map(|j| &c[j])
    }

    /// Chosen shortest path from `v` to the center `a` of a cluster containing `v`.
    pub fn path_to_center(&self, g: &WeightedGraph, a: VertexId, v: VertexId) -> Option<PathResult> {
        let mut m = self.cluster_member(a, v)?;
        let mut p = PathResult::trivial(v);
        while m.v != a {
            let w = g.edge(m.edge).w;
            p.push(PathEdge::Real(m.edge), m.next, w);
            m = self.cluster_member(a, m.next)?;
        }
        Some(p)
    }

    pub fn total_size(&self) -> usize {
        self.bunch.iter().flatten().map(|b| b.len()).sum()
    }

    /// `Σ_{v∈A_i} |B̄_i(v)|`, the size of the extended-bunch pair set at level `i`.
    pub fn extended_pair_count(&self, h: &Hierarchy, i: usize) -> usize {
        h.level(i).iter().map(|&v| self.extended_bunch(h, i, v).len()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HopKind {
    /// `(v, p_i(v))`, realized by the level-i pivot next-hop map.
    Pivot,
    /// `(v, u)` with `v ∈ A_i` and `u` in the level-i bunch of `v`.
    Bunch,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopEdge {
    pub x: VertexId,
    pub y: VertexId,
    pub w: f64,
    pub level: u32,
    pub kind: HopKind,
}

/// Virtual edges weighted by exact distances, one per unordered vertex pair.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HopEdgeSet {
    pub edges: Vec<HopEdge>,
}

/// Bunch pairs `(v, u)` for `v ∈ A_i`, plus pivot pairs `(v, p_i(v))` for every
/// vertex and level. A pair reachable several ways keeps its pivot form first,
/// then its lowest level.
pub fn hop_edge_sets(h: &Hierarchy, b: &BunchTable) -> HopEdgeSet {
    let mut all = Vec::new();
    for i in 1..h.l() {
        for v in 0..h.n() as VertexId {
            if let Some((p, d)) = h.pivot(i, v) {
                if p != v {
                    all.push(HopEdge { x: v, y: p, w: d, level: i as u32, kind: HopKind::Pivot });
                }
            }
        }
    }
    for i in 0..=b.top {
        for &v in h.level(i) {
            for &(u, d) in b.bunch(i, v) {
                if u != v {
                    all.push(HopEdge { x: v, y: u, w: d, level: i as u32, kind: HopKind::Bunch });
                }
            }
        }
    }
    all.sort_by_key(|e| (e.x.min(e.y), e.x.max(e.y), e.kind, e.level));
    all.dedup_by_key(|e| (e.x.min(e.y), e.x.max(e.y)));
    HopEdgeSet { edges: all }
}

impl HopEdgeSet {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn at_level(&self, i: usize) -> impl Iterator<Item = &HopEdge> {
        self.edges.iter().filter(move |e| e.level as usize == i)
    }

    pub fn as_triples(&self) -> Vec<(VertexId, VertexId, f64)> {
        self.edges.iter().map(|e| (e.x, e.y, e.w)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{all_pairs, dijkstra_sssp};
    use crate::gen::{erdos_renyi, path_graph};
    use proptest::prelude::*;

    #[test]
    fn probability_one_keeps_everything() {
        let g = erdos_renyi(30, 0.2, 1..10, true, 3);
        let h = build_hierarchy(&g, &[1.0], 5);
        assert_eq!(h.level(1), h.level(0));
    }

    #[test]
    fn sampling_mean_matches_binomial() {
        let g = path_graph(1000, 1.0);
        let mean = (0..100u64)
            .map(|s| build_hierarchy(&g, &[0.5], s).level(1).len() as f64)
            .sum::<f64>()
            / 100.0;
        assert!((mean - 500.0).abs() <= 50.0, "mean {mean}");
    }

    #[test]
    fn forced_pivot_on_path() {
        let g = path_graph(3, 1.0);
        let h = Hierarchy::from_levels(&g, vec![vec![0, 1, 2], vec![2]], vec![], 0);
        assert_eq!(h.pivot(1, 0), Some((2, 2.0)));
        assert_eq!(h.pivot_path(&g, 1, 0).unwrap().vertices, vec![0, 1, 2]);
        assert_eq!(h.pivot(0, 1), Some((1, 0.0)));
    }

    #[test]
    fn top_level_bunch_is_whole_level() {
        let g = erdos_renyi(40, 0.15, 1..10, true, 1);
        let h = build_hierarchy(&g, &[0.3], 2);
        let b = bunches(&h, &g, 1.0);
        let top: Vec<_> = h.level(1).to_vec();
        for &v in &top {
            let ids: Vec<_> = b.bunch(1, v).iter().map(|x| x.0).collect();
            assert_eq!(ids, top);
        }
    }

    #[test]
    fn member_of_next_level_has_empty_bunch() {
        let g = erdos_renyi(40, 0.15, 1..10, true, 4);
        let h = build_hierarchy(&g, &[0.3, 0.3], 2);
        let b = bunches(&h, &g, 0.5);
        for &v in h.level(1) {
            assert!(b.bunch(0, v).is_empty());
        }
    }

    #[test]
    fn single_level_hop_edges_form_clique() {
        let g = erdos_renyi(12, 0.3, 1..5, true, 9);
        let h = build_hierarchy(&g, &[], 0);
        let b = bunches(&h, &g, 0.5);
        assert_eq!(hop_edge_sets(&h, &b).len(), 12 * 11 / 2);
    }

    fn brute_bunch(h: &Hierarchy, d: &[Vec<f64>], i: usize, v: usize, rho: f64) -> Vec<VertexId> {
        let thr = h.bunch_threshold(i, v as VertexId);
        h.level(i)
            .iter()
            .copied()
            .filter(|&u| d[v][u as usize] < rho * thr && d[v][u as usize].is_finite())
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn bunches_match_definition(n in 10usize..60, seed in any::<u64>(), half in any::<bool>()) {
            let g = erdos_renyi(n, 0.12, 1..20, seed % 3 != 0, seed);
            let probs = [0.4, 0.4, 0.5];
            let h = build_hierarchy(&g, &probs, seed);
            let rho = if half { 0.5 } else { 1.0 };
            let b = bunches(&h, &g, rho);
            let d = all_pairs(&g);
            for i in 0..h.l() {
                for v in 0..n {
                    let got: Vec<_> = b.bunch(i, v as VertexId).iter().map(|x| x.0).collect();
                    prop_assert_eq!(got, brute_bunch(&h, &d, i, v, rho));
                    for &(u, du) in b.bunch(i, v as VertexId) {
                        prop_assert_eq!(du, d[v][u as usize]);
                    }
                }
            }
            for v in 0..n as VertexId {
                // Pivot monotonicity and exactness.
                let mut prev = 0.0;
                for i in 0..h.l() {
                    let (p, dp) = h.pivot(i, v).unwrap();
                    prop_assert!(h.in_level(p, i));
                    prop_assert_eq!(dp, d[v as usize][p as usize]);
                    let best = h.level(i).iter().map(|&u| d[v as usize][u as usize]).fold(f64::INFINITY, f64::min);
                    prop_assert_eq!(dp, best);
                    let tied_min = h.level(i).iter().copied().filter(|&u| d[v as usize][u as usize] == best).min().unwrap();
                    prop_assert_eq!(p, tied_min);
                    prop_assert!(dp >= prev);
                    prev = dp;
                }
            }
        }

        #[test]
        fn subpath_pivot_property(n in 10usize..50, seed in any::<u64>()) {
            let g = erdos_renyi(n, 0.15, 1..20, true, seed);
            let h = build_hierarchy(&g, &[0.3, 0.4], seed);
            for i in 0..h.l() {
                for v in 0..n as VertexId {
                    let p = h.pivot_path(&g, i, v).unwrap();
                    let (pv, dv) = h.pivot(i, v).unwrap();
                    prop_assert_eq!(p.weight, dv);
                    let t = dijkstra_sssp(&g, pv);
                    prop_assert_eq!(&t.path_to_source(&g, v).unwrap().vertices, &p.vertices);
                    for &x in &p.vertices {
                        prop_assert_eq!(h.pivot(i, x).unwrap().0, pv);
                    }
                }
            }
        }

        #[test]
        fn clusters_are_closed_under_center_paths(n in 10usize..50, seed in any::<u64>(), half in any::<bool>()) {
            let g = erdos_renyi(n, 0.15, 1..20, true, seed);
            let h = build_hierarchy(&g, &[0.3, 0.4], seed);
            let b = bunches(&h, &g, if half { 0.5 } else { 1.0 });
            for a in 0..n as VertexId {
                let t = dijkstra_sssp(&g, a);
                for m in b.cluster(a) {
                    let p = b.path_to_center(&g, a, m.v).unwrap();
                    prop_assert_eq!(p.weight, t.dist[m.v as usize]);
                    prop_assert_eq!(&p.vertices, &t.path_to_source(&g, m.v).unwrap().vertices);
                }
            }
        }

        #[test]
        fn hop_edges_carry_exact_distances(n in 10usize..50, seed in any::<u64>()) {
            let g = erdos_renyi(n, 0.15, 1..20, true, seed);
            let h = build_hierarchy(&g, &[0.3, 0.4], seed);
            let half = bunches(&h, &g, 0.5);
            let full = bunches(&h, &g, 1.0);
            let d = all_pairs(&g);
            for e in hop_edge_sets(&h, &half).edges {
                prop_assert_eq!(e.w, d[e.x as usize][e.y as usize]);
            }
            for i in 0..h.l() {
                prop_assert!(half_bunch_pairs(&h, &half, i).len() <= full.extended_pair_count(&h, i));
            }
        }
    }
}
