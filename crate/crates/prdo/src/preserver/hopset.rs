//! The half-bunch hopset: pivot and bunch pairs as virtual edges, each
//! flagged with the sub-oracle that expands it into a graph path.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_pivot_preserver, ExactPreserver, PivotNextHopMap, Preserver, PreserverError};
use crate::graph::{dijkstra_sssp, EdgeId, ExtraEdges, HopLayers, PathResult, VertexId, WeightedGraph};
use crate::hierarchy::{build_hierarchy, bunches, hop_edge_sets, BunchTable, Hierarchy, HopKind};
use crate::oracle::{normalize, InteractiveOracle, QueryError};
use crate::util::le_tol;

/// Which sub-oracle expands a hop edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flag {
    /// Pivot pair, answered exactly by next-hop chasing.
    Pivot = 1,
    /// Low-level bunch pair, answered by a stored exact path.
    Exact = 2,
    /// High-level bunch pair, answered by a nested approximate preserver.
    Nested = 3,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlaggedHop {
    pub x: VertexId,
    pub y: VertexId,
    pub w: f64,
    pub level: u32,
    pub flag: Flag,
}

/// Hop edges plus the sub-oracles that expand them. Every hop weight is the
/// exact distance between its endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hopset {
    pub levels: usize,
    pub probs: Vec<f64>,
    pub hops: Vec<FlaggedHop>,
    /// Next-hop maps of levels `1..levels`.
    pivots: Vec<PivotNextHopMap>,
    /// Exact preservers for flagged-2 pairs, indexed by level.
    exact: Vec<ExactPreserver>,
    nested: Option<Box<Preserver>>,
}

/// Half-bunch hopset over a fresh hierarchy; every bunch pair is expanded
/// exactly.
pub fn build_half_bunch_hopset(g: &WeightedGraph, probs: &[f64], seed: u64) -> Hopset {
    let h = build_hierarchy(g, probs, seed);
    let half = bunches(&h, g, 0.5);
    assemble(g, &h, &half, h.l(), |_| Ok(None)).expect("exact expansion cannot fail")
}

/// Flags bunch pairs of levels below `exact_below` as exact and the rest as
/// nested, then builds every sub-oracle. `nested` receives the nested pairs.
pub(crate) fn assemble<F>(
    g: &WeightedGraph,
    h: &Hierarchy,
    half: &BunchTable,
    exact_below: usize,
    nested: F,
) -> Result<Hopset, PreserverError>
where
    F: FnOnce(&[(VertexId, VertexId)]) -> Result<Option<Preserver>, PreserverError>,
{
    let sets = hop_edge_sets(h, half);
    let hops: Vec<FlaggedHop> = sets
        .edges
        .iter()
        .map(|e| {
            let flag = match e.kind {
                HopKind::Pivot => Flag::Pivot,
                HopKind::Bunch if (e.level as usize) < exact_below => Flag::Exact,
                HopKind::Bunch => Flag::Nested,
            };
            FlaggedHop { x: e.x, y: e.y, w: e.w, level: e.level, flag }
        })
        .collect();
    let pivots = (1..h.l()).map(|i| build_pivot_preserver(h, i)).collect();

    let mut per_level: Vec<Vec<((VertexId, VertexId), Vec<EdgeId>)>> = vec![Vec::new(); exact_below];
    for hop in hops.iter().filter(|e| e.flag == Flag::Exact) {
        // x ∈ A_i and y is a center whose cluster holds x.
        let p = half.path_to_center(g, hop.y, hop.x).expect("bunch member lies in the cluster");
        let p = if hop.x < hop.y { p } else { p.reversed() };
        per_level[hop.level as usize].push((normalize(hop.x, hop.y), p.real_edges().collect()));
    }
    let exact = per_level
        .into_iter()
        .map(|mut v| {
            v.sort_unstable_by_key(|e| e.0);
            let (demand, paths) = v.into_iter().unzip();
            ExactPreserver::from_paths(demand, paths)
        })
        .collect();

    let nested_pairs: Vec<_> = hops.iter().filter(|e| e.flag == Flag::Nested).map(|e| (e.x, e.y)).collect();
    let nested = if nested_pairs.is_empty() { None } else { nested(&nested_pairs)?.map(Box::new) };
    Ok(Hopset { levels: h.l(), probs: h.probs.clone(), hops, pivots, exact, nested })
}

impl Hopset {
    /// The hop edges as a virtual edge table; `Virtual(i)` is `hops[i]`.
    pub fn extra(&self, n: usize) -> ExtraEdges {
        ExtraEdges::new(n, self.hops.iter().map(|e| (e.x, e.y, e.w)).collect())
    }

    pub fn len(&self) -> usize {
        self.hops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hops.is_empty()
    }

    pub fn count_flag(&self, flag: Flag) -> usize {
        self.hops.iter().filter(|e| e.flag == flag).count()
    }

    pub fn nested(&self) -> Option<&Preserver> {
        self.nested.as_deref()
    }

    /// Graph path realizing hop `idx`, walked from endpoint `from`.
    pub fn witness(&self, g: &WeightedGraph, idx: u32, from: VertexId) -> Result<PathResult, QueryError> {
        let e = self.hops[idx as usize];
        let to = if from == e.x { e.y } else { e.x };
        match e.flag {
            Flag::Pivot => self.pivots[e.level as usize - 1].query(g, from, to),
            Flag::Exact => self.exact[e.level as usize].query(g, from, to),
            Flag::Nested => match &self.nested {
                Some(p) => p.query(g, from, to),
                None => Err(QueryError::NotInDemand(from, to)),
            },
        }
    }

    /// Largest ratio of witness weight to hop weight.
    pub fn witness_stretch(&self) -> f64 {
        if self.nested.is_some() && self.count_flag(Flag::Nested) > 0 {
            self.nested.as_ref().unwrap().declared_stretch()
        } else {
            1.0
        }
    }

    /// Sorted union of every graph edge a witness may use.
    pub fn support(&self) -> Vec<EdgeId> {
        let mut es: Vec<EdgeId> = Vec::new();
        for p in &self.pivots {
            es.extend(p.edge_set());
        }
        for x in &self.exact {
            es.extend(x.edge_set());
        }
        if let Some(p) = &self.nested {
            es.extend(p.edge_set());
        }
        es.sort_unstable();
        es.dedup();
        es
    }

    /// Hop records (endpoints, weight, flag) plus every sub-oracle.
    pub fn size_words(&self) -> usize {
        4 * self.hops.len()
            + self.pivots.iter().map(|p| p.size_words()).sum::<usize>()
            + self.exact.iter().map(|p| p.size_words()).sum::<usize>()
            + self.nested.as_ref().map_or(0, |p| p.size_words())
    }
}

/// Outcome of checking `d_G(u,v) <= d^{(β)}_{G∪H}(u,v) <= α·d_G(u,v)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HopsetReport {
    pub pairs: usize,
    /// `(u, v, d_G, d^{(β)})` for every pair breaking either side.
    pub violations: Vec<(VertexId, VertexId, f64, f64)>,
    /// Largest `d^{(β)} / d_G` over connected pairs with `u != v`.
    pub max_stretch: f64,
    /// Smallest hop count under which every pair is within `α`.
    pub min_sufficient_beta: u64,
}

/// Runs uncapped hop rounds per source, so both the value at `beta` and the
/// smallest sufficient hop count are read off the same history.
pub fn verify_hopset(
    g: &WeightedGraph,
    hs: &Hopset,
    alpha: f64,
    beta: u64,
    pairs: &[(VertexId, VertexId)],
) -> HopsetReport {
    let extra = hs.extra(g.n());
    let mut sources: Vec<VertexId> = pairs.iter().map(|p| p.0).collect();
    sources.sort_unstable();
    sources.dedup();
    let per_source: Vec<HopsetReport> = sources
        .par_iter()
        .map(|&s| {
            let t = dijkstra_sssp(g, s);
            let layers = HopLayers::run(g, &extra, s, u64::MAX, &[]);
            let mut r = HopsetReport::default();
            for &(_, v) in pairs.iter().filter(|p| p.0 == s) {
                r.pairs += 1;
                let d = t.dist[v as usize];
                let db = layers.value(v, beta);
                if !d.is_finite() {
                    if db.is_finite() {
                        r.violations.push((s, v, d, db));
                    }
                    continue;
                }
                if !le_tol(d, db) || !le_tol(db, alpha * d) {
                    r.violations.push((s, v, d, db));
                }
                if d > 0.0 {
                    r.max_stretch = r.max_stretch.max(db / d);
                }
                let need = layers.first_round_within(v, alpha * d * (1.0 + 1e-9)).unwrap_or(u64::MAX);
                r.min_sufficient_beta = r.min_sufficient_beta.max(need);
            }
            r
        })
        .collect();
    let mut out = HopsetReport::default();
    for r in per_source {
        out.pairs += r.pairs;
        out.violations.extend(r.violations);
        out.max_stretch = out.max_stretch.max(r.max_stretch);
        out.min_sufficient_beta = out.min_sufficient_beta.max(r.min_sufficient_beta);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::erdos_renyi;
    use crate::graph::{validate_path, RealEdgeSet};
    use crate::preserver::{beta_l, v1_levels, v1_probs};
    use proptest::prelude::*;

    fn all_pairs(n: usize) -> Vec<(VertexId, VertexId)> {
        (0..n as VertexId).flat_map(|u| (0..n as VertexId).map(move |v| (u, v))).collect()
    }

    #[test]
    fn hop_weights_are_exact_and_witnesses_valid() {
        let g = erdos_renyi(80, 0.06, 1..40, true, 5);
        let hs = build_half_bunch_hopset(&g, &v1_probs(80, 3), 5);
        assert!(hs.count_flag(Flag::Nested) == 0 && hs.nested().is_none());
        let s = RealEdgeSet::subset(&g, hs.support());
        for (i, e) in hs.hops.iter().enumerate() {
            assert_eq!(e.w, dijkstra_sssp(&g, e.x).dist[e.y as usize]);
            for from in [e.x, e.y] {
                let to = if from == e.x { e.y } else { e.x };
                let p = hs.witness(&g, i as u32, from).unwrap();
                assert_eq!(validate_path(&s, &p, from, to).unwrap(), e.w);
            }
        }
    }

    #[test]
    fn verify_reports_exact_distances_when_uncapped() {
        let g = erdos_renyi(40, 0.1, 1..20, true, 2);
        let hs = build_half_bunch_hopset(&g, &[0.3], 2);
        let r = verify_hopset(&g, &hs, 1.0, 40, &all_pairs(40));
        assert!(r.violations.is_empty());
        assert_eq!(r.max_stretch, 1.0);
        assert!(r.min_sufficient_beta <= 39);
        let tight = verify_hopset(&g, &hs, 1.0, 1, &all_pairs(40));
        assert!(tight.min_sufficient_beta <= 1 || !tight.violations.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn hopset_meets_its_hop_bound(n in 30usize..90, seed in any::<u64>(), k in 3u32..6) {
            let g = erdos_renyi(n, 0.07, 1..60, true, seed);
            let hs = build_half_bunch_hopset(&g, &v1_probs(n, k), seed);
            let eps = 1.0;
            let beta = beta_l(v1_levels(k), eps);
            let r = verify_hopset(&g, &hs, 1.0 + eps, beta, &all_pairs(n));
            prop_assert!(r.violations.is_empty(), "{:?}", &r.violations[..r.violations.len().min(3)]);
        }
    }
}
