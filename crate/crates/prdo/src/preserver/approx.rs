//! Approximate interactive preservers: a hopset plus, per demand pair, the
//! fewest-hop path in `G ∪ H` within the weight bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hopset::{assemble, Hopset};
use super::PreserverError;
use crate::graph::{dijkstra_sssp, EdgeId, HopLayers, PathEdge, PathResult, VertexId, WeightedGraph};
use crate::hierarchy::{build_hierarchy, bunches};
use crate::oracle::{check_vertex, normalize, InteractiveOracle, QueryError};
use crate::util::{ceil_u64, derive_seed, sat_pow};

const GROWTH: f64 = 4.0 / 3.0;

fn ceil_log(x: f64, base: f64) -> usize {
    if x <= 1.0 {
        0
    } else {
        (x.ln() / base.ln() - 1e-9).ceil() as usize
    }
}

/// `⌈log_{4/3} k⌉ + 1`.
pub fn v1_levels(k: u32) -> usize {
    ceil_log(k as f64, GROWTH) + 1
}

/// `q_i = ½ n^{-(4/3)^i / (3k)}` for `i < l-1`.
pub fn v1_probs(n: usize, k: u32) -> Vec<f64> {
    let l = v1_levels(k);
    (0..l - 1)
        .map(|i| 0.5 * (n as f64).powf(-GROWTH.powi(i as i32) / (3.0 * k as f64)))
        .collect()
}

/// Hop bound `2 (2 ⌈72 l / ε⌉)^{l-1}` of the half-bunch hopset, saturating.
pub fn beta_l(l: usize, eps: f64) -> u64 {
    let c = ceil_u64(72.0 * l as f64 / eps);
    sat_pow(c.saturating_mul(2), l.saturating_sub(1) as u32).saturating_mul(2)
}

fn beta_l_f64(l: usize, eps: f64) -> f64 {
    2.0 * (2.0 * (72.0 * l as f64 / eps).ceil()).powi(l as i32 - 1)
}

/// Hop bound of the v1 hierarchy for parameter `k`.
pub fn gamma_43(eps: f64, k: u32) -> u64 {
    beta_l(v1_levels(k), eps)
}

/// Hop bound `⌊(12 + 40/ε)^{l-1}⌋` for the `3+ε` variant, saturating.
pub fn three_eps_cap(l: usize, eps: f64) -> u64 {
    let x = (12.0 + 40.0 / eps).powi(l as i32 - 1);
    if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x.floor() as u64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct V2Params {
    /// Levels below `h` follow the v1 schedule and keep exact bunch paths.
    pub h: usize,
    pub l: usize,
    pub probs: Vec<f64>,
    pub gamma: f64,
}

/// Two-regime schedule: `q_i` as in v1 for `i < h`, then
/// `q_i = ½ (n/γ)^{-2^{i-h}/k}`, with `h = ⌈log_{4/3}(k log γ / log n + 1)⌉`
/// and `l = ⌈log₂ k⌉ + 1 + h`.
pub fn v2_params(n: usize, k: u32, eps: f64) -> V2Params {
    let gamma = beta_l_f64(v1_levels(k), eps);
    let nf = n.max(2) as f64;
    let h = ceil_log(k as f64 * gamma.ln() / nf.ln() + 1.0, GROWTH);
    let l = ceil_log(k as f64, 2.0) + 1 + h;
    let probs = (0..l - 1)
        .map(|i| {
            if i < h {
                0.5 * nf.powf(-GROWTH.powi(i as i32) / (3.0 * k as f64))
            } else {
                0.5 * (nf / gamma).powf(-(2f64.powi((i - h) as i32)) / k as f64)
            }
        })
        .collect();
    V2Params { h, l, probs, gamma }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreserverKind {
    /// Stretch `1+ε`.
    V1,
    /// Stretch `(1+ε/3)²` with a nested v1 preserver for high-level pairs.
    V2,
    /// Stretch `3+ε`.
    ThreeEps,
}

/// Demand pairs with stored mixed paths over graph and hop edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preserver {
    pub kind: PreserverKind,
    pub k: u32,
    pub eps: f64,
    pub stretch: f64,
    /// Weight bound used when choosing stored paths, relative to `d_G`.
    pub path_factor: f64,
    pub hop_cap: u64,
    demand: Vec<(VertexId, VertexId)>,
    offsets: Vec<u32>,
    steps: Vec<PathEdge>,
    hopset: Hopset,
    edges: Vec<EdgeId>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StoredPathStats {
    pub max_steps: usize,
    /// Steps that are hop edges or graph edges outside the hopset support.
    pub max_outside_support: usize,
}

fn check_common(g: &WeightedGraph, k: u32, eps: f64, pairs: &[(VertexId, VertexId)]) -> Result<(), PreserverError> {
    if k < 3 {
        return Err(PreserverError::InvalidParams(format!("k must be at least 3, got {k}")));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(PreserverError::InvalidParams(format!("eps must be positive, got {eps}")));
    }
    if let Some(&(u, v)) = pairs.iter().find(|&&(u, v)| u as usize >= g.n() || v as usize >= g.n()) {
        return Err(PreserverError::InvalidParams(format!("pair ({u},{v}) out of range")));
    }
    Ok(())
}

/// `1+ε` preserver over the v1 hierarchy.
pub fn build_eps_preserver_v1(
    g: &WeightedGraph,
    k: u32,
    eps: f64,
    pairs: &[(VertexId, VertexId)],
    seed: u64,
) -> Result<Preserver, PreserverError> {
    check_common(g, k, eps, pairs)?;
    if eps > 2.0 * (k as f64).log2() {
        return Err(PreserverError::InvalidParams(format!("eps must be at most 2 log2 k, got {eps}")));
    }
    let h = build_hierarchy(g, &v1_probs(g.n(), k), seed);
    let half = bunches(&h, g, 0.5);
    let hs = assemble(g, &h, &half, h.l(), |_| Ok(None))?;
    store_paths(g, PreserverKind::V1, k, eps, pairs, hs, 1.0 + eps, beta_l(h.l(), eps), 1.0 + eps)
}

/// `(1+ε/3)²` preserver: exact expansion below level `h`, a nested v1
/// preserver with `ε/3` for the bunch pairs above.
pub fn build_eps_preserver_v2(
    g: &WeightedGraph,
    k: u32,
    eps: f64,
    pairs: &[(VertexId, VertexId)],
    seed: u64,
) -> Result<Preserver, PreserverError> {
    check_common(g, k, eps, pairs)?;
    if eps > 1.0 {
        return Err(PreserverError::InvalidParams(format!("eps must be at most 1, got {eps}")));
    }
    if g.n() < 2 || k as f64 > (g.n() as f64).log2() {
        return Err(PreserverError::InvalidParams(format!("k must be at most log2 n, got {k}")));
    }
    build_eps_preserver_v2_with(g, k, eps, pairs, seed, &v2_params(g.n(), k, eps))
}

/// v2 construction under an explicit level schedule.
pub fn build_eps_preserver_v2_with(
    g: &WeightedGraph,
    k: u32,
    eps: f64,
    pairs: &[(VertexId, VertexId)],
    seed: u64,
    p: &V2Params,
) -> Result<Preserver, PreserverError> {
    check_common(g, k, eps, pairs)?;
    let e3 = eps / 3.0;
    let h = build_hierarchy(g, &p.probs, seed);
    let half = bunches(&h, g, 0.5);
    let hs = assemble(g, &h, &half, p.h, |q3| {
        build_eps_preserver_v1(g, k, e3, q3, derive_seed(seed, 3)).map(Some)
    })?;
    let f = 1.0 + e3;
    store_paths(g, PreserverKind::V2, k, eps, pairs, hs, f, beta_l(h.l(), e3), f * f)
}

/// `3+ε` preserver over the v1 hierarchy with the shorter hop bound.
pub fn build_3eps_preserver(
    g: &WeightedGraph,
    k: u32,
    eps: f64,
    pairs: &[(VertexId, VertexId)],
    seed: u64,
) -> Result<Preserver, PreserverError> {
    check_common(g, k, eps, pairs)?;
    let h = build_hierarchy(g, &v1_probs(g.n(), k), seed);
    let half = bunches(&h, g, 0.5);
    let hs = assemble(g, &h, &half, h.l(), |_| Ok(None))?;
    store_paths(g, PreserverKind::ThreeEps, k, eps, pairs, hs, 3.0 + eps, three_eps_cap(h.l(), eps), 3.0 + eps)
}

#[allow(clippy::too_many_arguments)]
fn store_paths(
    g: &WeightedGraph,
    kind: PreserverKind,
    k: u32,
    eps: f64,
    pairs: &[(VertexId, VertexId)],
    hopset: Hopset,
    path_factor: f64,
    hop_cap: u64,
    stretch: f64,
) -> Result<Preserver, PreserverError> {
    let mut demand: Vec<_> = pairs.iter().map(|&(a, b)| normalize(a, b)).collect();
    demand.sort_unstable();
    demand.dedup();
    let extra = hopset.extra(g.n());
    let mut groups: Vec<&[(VertexId, VertexId)]> = demand.chunk_by(|a, b| a.0 == b.0).collect();
    groups.retain(|c| !c.is_empty());
    let paths: Vec<Vec<Vec<PathEdge>>> = groups
        .par_iter()
        .map(|grp| {
            let s = grp[0].0;
            let t = dijkstra_sssp(g, s);
            let mut targets = Vec::with_capacity(grp.len());
            for &(_, v) in grp.iter() {
                let d = t.dist[v as usize];
                if !d.is_finite() {
                    return Err(PreserverError::Unreachable(s, v));
                }
                targets.push((v, path_factor * d * (1.0 + 1e-12)));
            }
            let layers = HopLayers::run(g, &extra, s, hop_cap, &targets);
            targets
                .iter()
                .map(|&(v, bound)| {
                    let r = layers
                        .first_round_within(v, bound)
                        .ok_or(PreserverError::NoPathWithinCap { u: s, v, cap: hop_cap })?;
                    Ok(layers.path(v, r).expect("round has a witness").edges)
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let mut offsets = vec![0u32];
    let mut steps = Vec::new();
    for p in paths.into_iter().flatten() {
        steps.extend(p);
        offsets.push(steps.len() as u32);
    }
    let mut edges = hopset.support();
    edges.extend(steps.iter().filter_map(|s| match s {
        PathEdge::Real(e) => Some(*e),
        PathEdge::Virtual(_) => None,
    }));
    edges.sort_unstable();
    edges.dedup();
    Ok(Preserver { kind, k, eps, stretch, path_factor, hop_cap, demand, offsets, steps, hopset, edges })
}

impl Preserver {
    pub fn demand(&self) -> &[(VertexId, VertexId)] {
        &self.demand
    }

    pub fn hopset(&self) -> &Hopset {
        &self.hopset
    }

    /// Stored steps from the smaller to the larger endpoint.
    pub fn stored_path(&self, u: VertexId, v: VertexId) -> Option<&[PathEdge]> {
        let idx = self.demand.binary_search(&normalize(u, v)).ok()?;
        Some(&self.steps[self.offsets[idx] as usize..self.offsets[idx + 1] as usize])
    }

    pub fn stored_path_stats(&self) -> StoredPathStats {
        let support = self.hopset.support();
        let mut st = StoredPathStats::default();
        for i in 0..self.demand.len() {
            let p = &self.steps[self.offsets[i] as usize..self.offsets[i + 1] as usize];
            let outside = p
                .iter()
                .filter(|s| match s {
                    PathEdge::Real(e) => support.binary_search(e).is_err(),
                    PathEdge::Virtual(_) => true,
                })
                .count();
            st.max_steps = st.max_steps.max(p.len());
            st.max_outside_support = st.max_outside_support.max(outside);
        }
        st
    }
}

impl InteractiveOracle for Preserver {
    fn query(&self, g: &WeightedGraph, u: VertexId, v: VertexId) -> Result<PathResult, QueryError> {
        check_vertex(g, u)?;
        check_vertex(g, v)?;
        let (a, _) = normalize(u, v);
        let steps = self.stored_path(u, v).ok_or(QueryError::NotInDemand(u, v))?;
        let mut p = PathResult::trivial(a);
        let mut cur = a;
        for &s in steps {
            match s {
                PathEdge::Real(e) => {
                    let ed = g.edge(e);
                    cur = ed.other(cur);
                    p.push(s, cur, ed.w);
                }
                PathEdge::Virtual(i) => {
                    let w = self.hopset.witness(g, i, cur)?;
                    cur = w.target();
                    p.extend(&w);
                }
            }
        }
        Ok(if u == a { p } else { p.reversed() })
    }

    fn declared_stretch(&self) -> f64 {
        self.stretch
    }

    /// Stored steps, two words per demand key, and the hopset.
    fn size_words(&self) -> usize {
        self.steps.len() + 2 * self.demand.len() + self.hopset.size_words()
    }

    fn edge_set(&self) -> Vec<EdgeId> {
        self.edges.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{erdos_renyi, grid};
    use crate::graph::{validate_path, RealEdgeSet};
    use crate::preserver::Flag;
    use crate::util::le_tol;
    use proptest::prelude::*;

    fn check(g: &WeightedGraph, p: &Preserver, pairs: &[(VertexId, VertexId)]) {
        let s = RealEdgeSet::subset(g, p.edge_set());
        for &(a, b) in pairs {
            let d = dijkstra_sssp(g, a).dist[b as usize];
            for (x, y) in [(a, b), (b, a)] {
                let path = p.query(g, x, y).unwrap();
                let w = validate_path(&s, &path, x, y).unwrap();
                assert!(le_tol(d, w) && le_tol(w, p.declared_stretch() * d), "{x}-{y}: {w} vs {d}");
            }
        }
    }

    #[test]
    fn params() {
        assert_eq!(v1_levels(3), 5);
        assert_eq!(v1_levels(4), 6);
        assert_eq!(beta_l(2, 72.0), 2 * 4);
        assert_eq!(beta_l(40, 0.01), u64::MAX);
        assert_eq!(three_eps_cap(3, 40.0), 169);
        let p = v1_probs(1000, 3);
        assert_eq!(p.len(), 4);
        assert!(p.windows(2).all(|w| w[1] < w[0]));
        let v2 = v2_params(200, 3, 1.0);
        assert_eq!(v2.l, 2 + 1 + v2.h);
        assert_eq!(v2.probs.len(), v2.l - 1);
        assert!(v2.probs.iter().all(|&q| q > 0.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = erdos_renyi(30, 0.2, 1..5, true, 0);
        assert!(build_eps_preserver_v1(&g, 2, 0.5, &[], 0).is_err());
        assert!(build_eps_preserver_v1(&g, 3, 0.0, &[], 0).is_err());
        assert!(build_eps_preserver_v1(&g, 3, 5.0, &[], 0).is_err());
        assert!(build_eps_preserver_v2(&g, 3, 1.5, &[], 0).is_err());
        assert!(build_eps_preserver_v2(&g, 6, 0.5, &[], 0).is_err());
        assert!(build_3eps_preserver(&g, 3, 0.5, &[(0, 99)], 0).is_err());
    }

    #[test]
    fn outside_demand_is_an_error() {
        let g = grid(5, 5, 1..9, 1);
        let p = build_eps_preserver_v1(&g, 3, 0.5, &[(0, 24)], 1).unwrap();
        assert_eq!(p.query(&g, 0, 1), Err(QueryError::NotInDemand(0, 1)));
        assert!(p.query(&g, 24, 0).is_ok());
    }

    #[test]
    fn unreachable_pair_is_rejected() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(
            build_eps_preserver_v1(&g, 3, 0.5, &[(0, 3)], 0).unwrap_err(),
            PreserverError::Unreachable(0, 3)
        );
    }

    #[test]
    fn v2_uses_nested_preserver() {
        let g = erdos_renyi(200, 0.03, 1..100, true, 9);
        let pairs: Vec<_> = (0..60).map(|i| (i, 199 - i)).collect();
        let p = build_eps_preserver_v2(&g, 3, 0.5, &pairs, 9).unwrap();
        check(&g, &p, &pairs);
        // At this size the default schedule leaves nothing above level h, so
        // force a split after level 1.
        let sched = V2Params { h: 1, l: 5, probs: v1_probs(200, 3), gamma: 0.0 };
        let p = build_eps_preserver_v2_with(&g, 3, 0.5, &pairs, 9, &sched).unwrap();
        assert!(p.hopset().count_flag(Flag::Nested) > 0);
        assert!(p.hopset().nested().is_some());
        check(&g, &p, &pairs);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]

        #[test]
        fn all_variants_meet_stretch(n in 30usize..100, seed in any::<u64>(), raw in prop::collection::vec((0u32..100, 0u32..100), 1..40)) {
            let g = erdos_renyi(n, 0.06, 1..80, true, seed);
            let pairs: Vec<_> = raw.iter().map(|&(a, b)| (a % n as u32, b % n as u32)).collect();
            let v1 = build_eps_preserver_v1(&g, 3, 0.25, &pairs, seed).unwrap();
            check(&g, &v1, &pairs);
            let t = build_3eps_preserver(&g, 4, 0.5, &pairs, seed).unwrap();
            check(&g, &t, &pairs);
            prop_assert!(v1.stored_path_stats().max_steps as u64 <= v1.hop_cap);
            let keys: std::collections::BTreeSet<_> = pairs.iter().map(|&(a, b)| normalize(a, b)).collect();
            let steps: usize = keys.iter().map(|&(a, b)| v1.stored_path(a, b).unwrap().len()).sum();
            prop_assert_eq!(v1.size_words(), steps + 2 * keys.len() + v1.hopset().size_words());
        }
    }
}
