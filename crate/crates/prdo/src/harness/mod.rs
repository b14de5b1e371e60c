//! Builds any structure of the library from a plain description, stores it
//! in a self-describing container and checks or measures it against exact
//! distances.

mod bench;
mod verify;

pub use bench::{bench, stats, BenchReport, OpStats};
pub use verify::{verify, workers_from_env, CheckCount, VerificationReport};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::composer::{
    build_preset, compose_with_params, sigma, with_depth, ComposeError, EmulatorKind, Prdo, Preset,
};
use crate::emulator::{
    build_ap_emulator, build_mn_emulator, build_tz_emulator, ApEmulator, EmulatorError, InteractiveEmulator, MetricGraph,
    MnEmulator, TzEmulator,
};
use crate::graph::{VertexId, WeightedGraph};
use crate::hierarchy::build_hierarchy;
use crate::oracle::InteractiveOracle;
use crate::partial_tz::{build_partial_tz, PartialTz, PartialTzError};
use crate::preserver::{
    build_3eps_preserver, build_eps_preserver_v1, build_eps_preserver_v2, build_exact_pairwise_preserver,
    build_half_bunch_hopset, build_pivot_preserver, v1_probs, ExactPreserver, Hopset, PivotNextHopMap, Preserver,
    PreserverError,
};
use crate::util::rng;

const MAGIC: &[u8; 4] = b"PRDO";
const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid build request: {0}")]
    InvalidSpec(String),
    #[error("preserver: {0}")]
    Preserver(#[from] PreserverError),
    #[error("partial oracle: {0}")]
    PartialTz(#[from] PartialTzError),
    #[error("emulator: {0}")]
    Emulator(#[from] EmulatorError),
    #[error("composer: {0}")]
    Compose(#[from] ComposeError),
    #[error("oracle file: {0}")]
    Format(String),
}

/// Every structure the harness can build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Construction {
    /// Exact paths for the demand pairs.
    Exact,
    /// Next-hop map to the pivot of one level.
    Pivot,
    V1,
    V2,
    ThreeEps,
    Hopset,
    PartialTz,
    Emulator(EmulatorKind),
    Preset(Preset),
}

impl Construction {
    pub fn all() -> Vec<Construction> {
        use EmulatorKind::*;
        let mut v = vec![
            Construction::Exact,
            Construction::Pivot,
            Construction::V1,
            Construction::V2,
            Construction::ThreeEps,
            Construction::Hopset,
            Construction::PartialTz,
            Construction::Emulator(Tz),
            Construction::Emulator(Mn),
            Construction::Emulator(Ap),
        ];
        v.extend(Preset::ALL.map(Construction::Preset));
        v
    }

    /// Whether the build consumes demand pairs.
    pub fn needs_demand(self) -> bool {
        matches!(self, Construction::Exact | Construction::V1 | Construction::V2 | Construction::ThreeEps)
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Construction::Exact => write!(f, "exact"),
            Construction::Pivot => write!(f, "pivot"),
            Construction::V1 => write!(f, "v1"),
            Construction::V2 => write!(f, "v2"),
            Construction::ThreeEps => write!(f, "3eps"),
            Construction::Hopset => write!(f, "hopset"),
            Construction::PartialTz => write!(f, "partial-tz"),
            Construction::Emulator(EmulatorKind::Tz) => write!(f, "tz-emulator"),
            Construction::Emulator(EmulatorKind::Mn) => write!(f, "mn-emulator"),
            Construction::Emulator(EmulatorKind::Ap) => write!(f, "ap-emulator"),
            Construction::Preset(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Construction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Construction::all().into_iter().find(|c| c.to_string() == s).ok_or_else(|| {
            let names: Vec<String> = Construction::all().iter().map(|c| c.to_string()).collect();
            format!("unknown construction {s:?}; expected one of {}", names.join(", "))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildSpec {
    pub construction: Construction,
    pub k: u32,
    pub eps: f64,
    /// Depth of the partial oracle; for composed presets an explicit depth
    /// replacing the selected one.
    pub h: Option<usize>,
    /// Hierarchy level of the pivot map.
    pub level: usize,
    pub seed: u64,
    pub demand: Vec<(VertexId, VertexId)>,
}

impl BuildSpec {
    pub fn new(construction: Construction, k: u32, eps: f64, seed: u64) -> Self {
        BuildSpec { construction, k, eps, h: None, level: 1, seed, demand: Vec::new() }
    }
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Structure {
    Exact(ExactPreserver),
    Pivot(PivotNextHopMap),
    Preserver(Preserver),
    Hopset(Hopset),
    PartialTz(PartialTz),
    Tz(TzEmulator),
    Mn(MnEmulator),
    Ap(ApEmulator),
    Prdo(Prdo),
}

impl Structure {
    fn kind_byte(&self) -> u8 {
        match self {
            Structure::Exact(_) => 0,
            Structure::Pivot(_) => 1,
            Structure::Preserver(_) => 2,
            Structure::Hopset(_) => 3,
            Structure::PartialTz(_) => 4,
            Structure::Tz(_) => 5,
            Structure::Mn(_) => 6,
            Structure::Ap(_) => 7,
            Structure::Prdo(_) => 8,
        }
    }

    fn restore(&mut self) {
        match self {
            Structure::Tz(e) => e.restore(),
            Structure::Ap(e) => e.restore(),
            Structure::Prdo(p) => p.restore(),
            _ => {}
        }
    }

    /// The structure as a path oracle on the input graph, if it is one.
    pub fn oracle(&self) -> Option<&dyn InteractiveOracle> {
        match self {
            Structure::Exact(p) => Some(p),
            Structure::Pivot(p) => Some(p),
            Structure::Preserver(p) => Some(p),
            Structure::Prdo(p) => Some(p),
            _ => None,
        }
    }

    /// The structure as an emulator over the vertices of the input graph.
    pub fn emulator(&self) -> Option<&dyn InteractiveEmulator> {
        match self {
            Structure::Tz(e) => Some(e),
            Structure::Mn(e) => Some(e),
            Structure::Ap(e) => Some(e),
            _ => None,
        }
    }

    pub fn size_words(&self) -> usize {
        match self {
            Structure::Hopset(h) => h.size_words(),
            Structure::PartialTz(p) => p.size_words(),
            _ => self.oracle().map(|o| o.size_words()).or_else(|| self.emulator().map(|e| e.size_words())).unwrap_or(0),
        }
    }
}

/// A built structure with the graph and request it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleFile {
    pub graph: WeightedGraph,
    pub spec: BuildSpec,
    /// Build accounting such as `h`, `k1`, `|S|` and edge counts.
    pub info: Vec<(String, f64)>,
    pub structure: Structure,
}

impl OracleFile {
    /// Magic, format version, structure kind, then the bincode body.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(self.structure.kind_byte());
        out.extend(bincode::serialize(self).expect("in-memory serialization"));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, HarnessError> {
        if bytes.len() < 7 || &bytes[..4] != MAGIC {
            return Err(HarnessError::Format("missing PRDO header".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(HarnessError::Format(format!("unsupported version {version}")));
        }
        let mut f: OracleFile = bincode::deserialize(&bytes[7..]).map_err(|e| HarnessError::Format(e.to_string()))?;
        if f.structure.kind_byte() != bytes[6] {
            return Err(HarnessError::Format("structure kind does not match header".into()));
        }
        f.graph.rebuild_adjacency();
        f.structure.restore();
        Ok(f)
    }

    pub fn info(&self, key: &str) -> Option<f64> {
        self.info.iter().find(|(k, _)| k == key).map(|x| x.1)
    }
}

/// `count` distinct pairs `u < v` drawn uniformly, or all of them if fewer exist.
pub fn random_pairs(n: usize, count: usize, seed: u64) -> Vec<(VertexId, VertexId)> {
    let total = n * n.saturating_sub(1) / 2;
    if count >= total {
        return all_pairs_list(n).into_iter().filter(|&(u, v)| u < v).collect();
    }
    let mut r = rng(seed, 0x7061_6972);
    let mut set = std::collections::BTreeSet::new();
    while set.len() < count {
        let (a, b) = (r.gen_range(0..n as VertexId), r.gen_range(0..n as VertexId));
        if a != b {
            set.insert((a.min(b), a.max(b)));
        }
    }
    set.into_iter().collect()
}

/// Every ordered pair, including `(v, v)`.
pub fn all_pairs_list(n: usize) -> Vec<(VertexId, VertexId)> {
    (0..n as VertexId).flat_map(|u| (0..n as VertexId).map(move |v| (u, v))).collect()
}

/// The demand pairs, each vertex with its pivot, or else every ordered pair.
pub fn default_queries(f: &OracleFile) -> Vec<(VertexId, VertexId)> {
    match &f.structure {
        _ if f.spec.construction.needs_demand() => f.spec.demand.clone(),
        Structure::Pivot(p) => (0..f.graph.n() as VertexId).filter_map(|v| p.pivot(v).map(|q| (v, q))).collect(),
        _ => all_pairs_list(f.graph.n()),
    }
}

fn require_connected(g: &WeightedGraph, what: Construction) -> Result<(), HarnessError> {
    if g.is_connected() {
        Ok(())
    } else {
        Err(HarnessError::InvalidSpec(format!("{what} needs a connected graph")))
    }
}

/// Builds the requested structure on `g` and records its accounting.
pub fn build(g: &WeightedGraph, spec: &BuildSpec) -> Result<OracleFile, HarnessError> {
    let (k, eps, seed) = (spec.k, spec.eps, spec.seed);
    let mut info: Vec<(String, f64)> = Vec::new();
    let mut put = |key: &str, v: f64| info.push((key.to_string(), v));
    if spec.construction.needs_demand() && spec.demand.is_empty() {
        return Err(HarnessError::InvalidSpec(format!("{} needs demand pairs", spec.construction)));
    }
    let structure = match spec.construction {
        Construction::Exact => Structure::Exact(build_exact_pairwise_preserver(g, &spec.demand)?),
        Construction::Pivot => {
            if k < 2 {
                return Err(HarnessError::InvalidSpec(format!("pivot needs k >= 2, got {k}")));
            }
            let h = build_hierarchy(g, &v1_probs(g.n(), k), seed);
            if spec.level < 1 || spec.level >= h.l() {
                return Err(HarnessError::InvalidSpec(format!("pivot level must lie in 1..{}", h.l())));
            }
            put("levels", h.l() as f64);
            put("level_size", h.level(spec.level).len() as f64);
            Structure::Pivot(build_pivot_preserver(&h, spec.level))
        }
        c @ (Construction::V1 | Construction::V2 | Construction::ThreeEps) => {
            let p = match c {
                Construction::V1 => build_eps_preserver_v1(g, k, eps, &spec.demand, seed)?,
                Construction::V2 => build_eps_preserver_v2(g, k, eps, &spec.demand, seed)?,
                _ => build_3eps_preserver(g, k, eps, &spec.demand, seed)?,
            };
            let st = p.stored_path_stats();
            put("demand", p.demand().len() as f64);
            put("levels", p.hopset().levels as f64);
            put("hop_edges", p.hopset().len() as f64);
            put("support", p.hopset().support().len() as f64);
            put("hop_cap", p.hop_cap as f64);
            put("max_path_steps", st.max_steps as f64);
            put("max_outside_support", st.max_outside_support as f64);
            Structure::Preserver(p)
        }
        Construction::Hopset => {
            if k < 3 {
                return Err(HarnessError::InvalidSpec(format!("hopset needs k >= 3, got {k}")));
            }
            let hs = build_half_bunch_hopset(g, &v1_probs(g.n(), k), seed);
            put("levels", hs.levels as f64);
            put("hop_edges", hs.len() as f64);
            put("support", hs.support().len() as f64);
            Structure::Hopset(hs)
        }
        Construction::PartialTz => {
            let o = build_partial_tz(g, k, spec.h.unwrap_or(2), seed)?;
            put("h", o.h as f64);
            put("escape", o.escape_set().len() as f64);
            put("edges", o.edge_set().len() as f64);
            Structure::PartialTz(o)
        }
        Construction::Emulator(kind) => {
            require_connected(g, spec.construction)?;
            let m = MetricGraph::of_graph(g);
            let s = match kind {
                EmulatorKind::Tz => Structure::Tz(build_tz_emulator(&m, k, seed)),
                EmulatorKind::Mn => {
                    let e = build_mn_emulator(&m, k, seed)?;
                    put("rounds", e.hier.levels.len() as f64);
                    Structure::Mn(e)
                }
                EmulatorKind::Ap => {
                    let e = build_ap_emulator(&m, k, eps, seed)?;
                    put("scales", e.scale_count() as f64);
                    Structure::Ap(e)
                }
            };
            put("emulator_edges", s.emulator().unwrap().used_edges().len() as f64);
            s
        }
        Construction::Preset(p) => {
            let o = match (p, spec.h) {
                (Preset::Composed(em, pr), Some(h)) => {
                    let aspect = if em == EmulatorKind::Ap { g.aspect_ratio() } else { 1.0 };
                    let params = with_depth(g.n(), k, eps, sigma(em, pr, k, eps, aspect), h)?;
                    Prdo::Composed(compose_with_params(g, &params, em, pr, seed)?)
                }
                _ => build_preset(g, p, k, eps, seed)?,
            };
            prdo_info(&o, "", &mut put);
            Structure::Prdo(o)
        }
    };
    put("size_words", structure.size_words() as f64);
    if let Some(o) = structure.oracle() {
        put("declared_stretch", o.declared_stretch());
        put("edges", o.edge_set().len() as f64);
    } else if let Some(e) = structure.emulator() {
        put("declared_stretch", e.declared_stretch());
    }
    Ok(OracleFile { graph: g.clone(), spec: spec.clone(), info, structure })
}

fn prdo_info(o: &Prdo, prefix: &str, put: &mut impl FnMut(&str, f64)) {
    let mut p = |key: &str, v: f64| put(&format!("{prefix}{key}"), v);
    match o {
        Prdo::Composed(c) => {
            p("h", c.params.h as f64);
            p("k1", c.params.k1 as f64);
            p("sigma", c.params.sigma);
            p("escape", c.escape.len() as f64);
            p("emulator_edges", c.emulator_edges() as f64);
            p("demand", c.preserver.demand().len() as f64);
            p("alpha_e", c.alpha_e);
            p("alpha_p", c.alpha_p);
            p("proved_bound", c.proved_bound);
        }
        Prdo::Partitioned(w) => {
            p("t", w.t as f64);
            p("clusters", w.cluster_count() as f64);
            p("max_depth", w.max_depth as f64);
            p("cluster_graph_edges", w.cluster_graph.graph.m() as f64);
            p("inner_edges", w.inner.edge_set().len() as f64);
            drop(p);
            prdo_info(&w.inner, &format!("{prefix}inner."), put);
        }
        Prdo::Table(_) => p("table", 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{erdos_renyi, path_graph};

    #[test]
    fn construction_names_round_trip() {
        for c in Construction::all() {
            assert_eq!(c.to_string().parse::<Construction>().unwrap(), c);
        }
        assert!("row1".parse::<Construction>().is_err());
    }

    #[test]
    fn container_round_trip_and_header() {
        let g = erdos_renyi(40, 0.1, 1..10, true, 2);
        let mut spec = BuildSpec::new(Construction::Preset(Preset::INNER), 4, 0.5, 9);
        spec.demand = random_pairs(40, 10, 1);
        let f = build(&g, &spec).unwrap();
        let bytes = f.to_bytes();
        assert_eq!(&bytes[..4], b"PRDO");
        assert_eq!(OracleFile::from_bytes(&bytes).unwrap(), f);
        let mut bad = bytes.clone();
        bad[6] = 0;
        assert!(OracleFile::from_bytes(&bad).is_err());
        assert!(OracleFile::from_bytes(&bytes[..5]).is_err());
    }

    #[test]
    fn preserver_needs_demand() {
        let g = path_graph(20, 1.0);
        let spec = BuildSpec::new(Construction::V1, 3, 0.5, 0);
        assert!(matches!(build(&g, &spec), Err(HarnessError::InvalidSpec(_))));
    }

    #[test]
    fn random_pairs_are_distinct_and_seeded() {
        let a = random_pairs(30, 50, 4);
        assert_eq!(a, random_pairs(30, 50, 4));
        assert_eq!(a.len(), 50);
        assert!(a.iter().all(|&(u, v)| u < v));
        assert_eq!(random_pairs(5, 100, 0).len(), 10);
    }
}
