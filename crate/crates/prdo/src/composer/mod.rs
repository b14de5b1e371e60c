//! Full path-reporting oracles: a partial oracle answers near pairs, and far
//! pairs escape to a sparse set `S`, cross it on an emulator of the metric
//! on `S`, and each emulator edge is expanded by a preserver built on the
//! emulator's edges. Partition wraps shrink the input first.

mod params;
mod partition;

pub use params::{delta, select_params, sigma, tau, with_depth, EmulatorKind, Params, Preset, PreserverChoice};
pub use partition::{
    build_stretch_friendly_partition, check_partition, cluster_graph, compose_ultra_sparse, compose_with_partition,
    ClusterGraph, PartitionError, PartitionReport, PartitionedPrdo, StretchFriendlyPartition,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emulator::{
    build_ap_emulator, build_mn_emulator, build_tz_emulator, ApEmulator, EmulatorError, InteractiveEmulator, MetricGraph,
    MnEmulator, TzEmulator,
};
use crate::graph::{dijkstra_sssp, EdgeId, PathEdge, PathResult, VertexId, WeightedGraph};
use crate::hierarchy::NONE;
use crate::oracle::{check_vertex, InteractiveOracle, QueryError};
use crate::partial_tz::{build_partial_tz, PartialAnswer, PartialTz, PartialTzError};
use crate::preserver::{build_3eps_preserver, build_eps_preserver_v1, Preserver, PreserverError};
use crate::util::derive_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComposeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("graph must be connected")]
    Disconnected,
    #[error("escape set is empty")]
    EmptyEscape,
    #[error("partial oracle: {0}")]
    PartialTz(#[from] PartialTzError),
    #[error("emulator: {0}")]
    Emulator(#[from] EmulatorError),
    #[error("preserver: {0}")]
    Preserver(#[from] PreserverError),
    #[error("partition: {0}")]
    Partition(#[from] PartitionError),
}

/// Work done by one query, separate from path emission.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryOps {
    /// Bunch-membership tests of the partial oracle.
    pub q_evals: usize,
    /// Emulator or witness edges expanded into graph paths.
    pub splices: usize,
    /// Parent pointers followed to find clusters, depths or tree paths.
    pub tree_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Emulator {
    Tz(TzEmulator),
    Mn(MnEmulator),
    Ap(ApEmulator),
}

impl Emulator {
    pub fn get(&self) -> &dyn InteractiveEmulator {
        match self {
            Emulator::Tz(e) => e,
            Emulator::Mn(e) => e,
            Emulator::Ap(e) => e,
        }
    }

    fn restore(&mut self) {
        match self {
            Emulator::Tz(e) => e.restore(),
            Emulator::Mn(_) => {}
            Emulator::Ap(e) => e.restore(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComposedPrdo {
    pub params: Params,
    pub emulator_kind: EmulatorKind,
    pub preserver_kind: PreserverChoice,
    pub d0: PartialTz,
    /// Escape set `S`, sorted; emulator point `i` is `escape[i]`.
    pub escape: Vec<VertexId>,
    pub emulator: Emulator,
    pub preserver: Preserver,
    edges: Vec<EdgeId>,
    /// Emulator stretch over `k1`, at least 1.
    pub alpha_e: f64,
    pub alpha_p: f64,
    stretch: f64,
    /// `2 α_P α_E (5h/2 + (1+3ε)k)`, reported next to the declared stretch.
    pub proved_bound: f64,
}

/// Composes with parameters chosen from the pair's `σ`.
pub fn compose_prdo(
    g: &WeightedGraph,
    k: u32,
    eps: f64,
    em: EmulatorKind,
    pr: PreserverChoice,
    seed: u64,
) -> Result<ComposedPrdo, ComposeError> {
    let aspect = if em == EmulatorKind::Ap { g.aspect_ratio() } else { 1.0 };
    let params = select_params(g.n(), k, eps, sigma(em, pr, k, eps, aspect))?;
    compose_with_params(g, &params, em, pr, seed)
}

pub fn compose_with_params(
    g: &WeightedGraph,
    params: &Params,
    em: EmulatorKind,
    pr: PreserverChoice,
    seed: u64,
) -> Result<ComposedPrdo, ComposeError> {
    if !g.is_connected() {
        return Err(ComposeError::Disconnected);
    }
    let (k, eps) = (params.k, params.eps);
    let d0 = build_partial_tz(g, k, params.h_requested, derive_seed(seed, 1))?;
    let mut escape = d0.escape_set().to_vec();
    escape.sort_unstable();
    if escape.is_empty() {
        return Err(ComposeError::EmptyEscape);
    }
    let metric = MetricGraph::from_subset(g, &escape);
    let es = derive_seed(seed, 2);
    let emulator = match em {
        EmulatorKind::Tz => Emulator::Tz(build_tz_emulator(&metric, params.k1, es)),
        EmulatorKind::Mn => Emulator::Mn(build_mn_emulator(&metric, params.k1, es)?),
        EmulatorKind::Ap => Emulator::Ap(build_ap_emulator(&metric, params.k1, eps, es)?),
    };
    let pairs: Vec<(VertexId, VertexId)> = emulator
        .get()
        .used_edges()
        .into_iter()
        .map(|i| {
            let (x, y, _) = emulator.get().edge(i);
            (escape[x as usize], escape[y as usize])
        })
        .collect();
    let ps = derive_seed(seed, 3);
    let preserver = match pr {
        PreserverChoice::V1 => build_eps_preserver_v1(g, k, pr.eps(eps), &pairs, ps)?,
        PreserverChoice::ThreeEps => build_3eps_preserver(g, k, pr.eps(eps), &pairs, ps)?,
    };
    let mut edges = d0.edge_set();
    edges.extend(preserver.edge_set());
    edges.sort_unstable();
    edges.dedup();
    let h = d0.h as f64;
    let k1 = params.k1 as f64;
    let alpha_e = (emulator.get().declared_stretch() / k1).max(1.0);
    let alpha_p = preserver.declared_stretch();
    let stretch = (2.0 * h + 1.0).max(alpha_p * alpha_e * (2.0 * h + k1 * (2.0 * h + 1.0)));
    let proved_bound = 2.0 * alpha_p * alpha_e * (2.5 * h + (1.0 + 3.0 * eps) * k as f64);
    let mut params = params.clone();
    params.h = d0.h;
    Ok(ComposedPrdo {
        params,
        emulator_kind: em,
        preserver_kind: pr,
        d0,
        escape,
        emulator,
        preserver,
        edges,
        alpha_e,
        alpha_p,
        stretch,
        proved_bound,
    })
}

impl ComposedPrdo {
    pub fn restore(&mut self) {
        self.emulator.restore();
    }

    /// Number of emulator edges, which is also the preserver's demand size.
    pub fn emulator_edges(&self) -> usize {
        self.emulator.get().used_edges().len()
    }

    fn point(&self, v: VertexId) -> VertexId {
        self.escape.binary_search(&v).expect("pivots lie in the escape set") as VertexId
    }

    pub fn query_counted(&self, g: &WeightedGraph, u: VertexId, v: VertexId, ops: &mut QueryOps) -> Result<PathResult, QueryError> {
        check_vertex(g, u)?;
        check_vertex(g, v)?;
        let (ans, evals) = self.d0.partial_query_counted(g, u, v);
        ops.q_evals += evals;
        let (mut out, from_v) = match ans {
            PartialAnswer::Direct(p) => return Ok(p),
            PartialAnswer::Escape { from_u, from_v } => (from_u, from_v),
        };
        let (a, b) = (out.target(), from_v.target());
        if a != b {
            let route = self.emulator.get().query(self.point(a), self.point(b))?;
            for w in route.vertices.windows(2) {
                let (x, y) = (self.escape[w[0] as usize], self.escape[w[1] as usize]);
                out.extend(&self.preserver.query(g, x, y)?);
                ops.splices += 1;
            }
        }
        out.extend(&from_v.reversed());
        Ok(out)
    }
}

impl InteractiveOracle for ComposedPrdo {
    fn query(&self, g: &WeightedGraph, u: VertexId, v: VertexId) -> Result<PathResult, QueryError> {
        self.query_counted(g, u, v, &mut QueryOps::default())
    }

    /// `max(2h+1, α_P α_E (2h + k1(2h+1)))`.
    fn declared_stretch(&self) -> f64 {
        self.stretch
    }

    fn size_words(&self) -> usize {
        self.d0.size_words() + self.escape.len() + self.emulator.get().size_words() + self.preserver.size_words()
    }

    fn edge_set(&self) -> Vec<EdgeId> {
        self.edges.clone()
    }
}

/// Exact shortest-path next hops toward every target, for graphs too small
/// for the composed construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactTable {
    /// `next[t][v]`: edge from `v` toward `t`.
    next: Vec<Vec<EdgeId>>,
    edges: Vec<EdgeId>,
}

pub fn build_exact_table(g: &WeightedGraph) -> ExactTable {
    let next: Vec<Vec<EdgeId>> = (0..g.n() as VertexId).map(|t| dijkstra_sssp(g, t).parent_edge).collect();
    let mut edges: Vec<EdgeId> = next.iter().flatten().copied().filter(|&e| e != NONE).collect();
    edges.sort_unstable();
    edges.dedup();
    ExactTable { next, edges }
}

impl InteractiveOracle for ExactTable {
    fn query(&self, g: &WeightedGraph, u: VertexId, v: VertexId) -> Result<PathResult, QueryError> {
        check_vertex(g, u)?;
        check_vertex(g, v)?;
        let row = &self.next[v as usize];
        let mut p = PathResult::trivial(u);
        let mut x = u;
        while x != v {
            let e = row[x as usize];
            if e == NONE {
                return Err(QueryError::Unreachable(u, v));
            }
            let ed = g.edge(e);
            x = ed.other(x);
            p.push(PathEdge::Real(e), x, ed.w);
        }
        Ok(p)
    }

    fn declared_stretch(&self) -> f64 {
        1.0
    }

    fn size_words(&self) -> usize {
        self.next.iter().map(Vec::len).sum()
    }

    fn edge_set(&self) -> Vec<EdgeId> {
        self.edges.clone()
    }
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Prdo {
    Composed(ComposedPrdo),
    Partitioned(PartitionedPrdo),
    Table(ExactTable),
}

impl Prdo {
    fn get(&self) -> &dyn InteractiveOracle {
        match self {
            Prdo::Composed(p) => p,
            Prdo::Partitioned(p) => p,
            Prdo::Table(p) => p,
        }
    }

    /// Rebuilds adjacency of internal graphs after deserialization.
    pub fn restore(&mut self) {
        match self {
            Prdo::Composed(p) => p.restore(),
            Prdo::Partitioned(p) => p.restore(),
            Prdo::Table(_) => {}
        }
    }

    pub fn query_counted(&self, g: &WeightedGraph, u: VertexId, v: VertexId, ops: &mut QueryOps) -> Result<PathResult, QueryError> {
        match self {
            Prdo::Composed(p) => p.query_counted(g, u, v, ops),
            Prdo::Partitioned(p) => p.query_counted(g, u, v, ops),
            Prdo::Table(p) => p.query(g, u, v),
        }
    }
}

impl InteractiveOracle for Prdo {
    fn query(&self, g: &WeightedGraph, u: VertexId, v: VertexId) -> Result<PathResult, QueryError> {
        self.get().query(g, u, v)
    }

    fn declared_stretch(&self) -> f64 {
        self.get().declared_stretch()
    }

    fn size_words(&self) -> usize {
        self.get().size_words()
    }

    fn edge_set(&self) -> Vec<EdgeId> {
        self.get().edge_set()
    }
}

fn log2(n: usize) -> f64 {
    (n.max(2) as f64).log2()
}

/// Cluster size of the partitioned preset: `⌈k log log n / log n⌉`.
pub fn partition_t(n: usize, k: u32) -> usize {
    let l = log2(n);
    ((k as f64 * l.log2().max(0.0) / l).ceil() as usize).max(1)
}

/// Cluster size of the ultra-sparse preset: `⌈log log n⌉`.
pub fn ultra_t(n: usize) -> usize {
    (log2(n).log2().max(0.0).ceil() as usize).max(1)
}

/// Inner oracle of the partition wraps: the MN emulator with the `3+ε`
/// preserver for `k` clamped to `⌊log₂ n⌋`, or an exact table when fewer
/// than 8 clusters remain.
pub fn inner_oracle(h: &WeightedGraph, k: u32, eps: f64, seed: u64) -> Result<Prdo, ComposeError> {
    let cap = log2(h.n()).floor() as u32;
    if h.n() < 8 || cap < 3 {
        return Ok(Prdo::Table(build_exact_table(h)));
    }
    let (em, pr) = (EmulatorKind::Mn, PreserverChoice::ThreeEps);
    Ok(Prdo::Composed(compose_prdo(h, k.clamp(3, cap), eps, em, pr, seed)?))
}

pub fn build_preset(g: &WeightedGraph, preset: Preset, k: u32, eps: f64, seed: u64) -> Result<Prdo, ComposeError> {
    match preset {
        Preset::Composed(em, pr) => Ok(Prdo::Composed(compose_prdo(g, k, eps, em, pr, seed)?)),
        Preset::Partitioned => {
            let t = partition_t(g.n(), k);
            Ok(Prdo::Partitioned(compose_with_partition(g, t, |h| inner_oracle(h, k, eps, seed))?))
        }
        Preset::Ultra => {
            let t = ultra_t(g.n());
            let k_inner = log2(g.n()).ceil() as u32;
            Ok(Prdo::Partitioned(compose_ultra_sparse(g, t, |h| inner_oracle(h, k_inner, eps, seed))?))
        }
    }
}
