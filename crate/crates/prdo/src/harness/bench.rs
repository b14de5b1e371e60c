//! Query work counts, timing and size accounting.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{OracleFile, Structure};
use crate::composer::{Prdo, QueryOps};
use crate::graph::{PathResult, VertexId};
use crate::oracle::{InteractiveOracle, QueryError};
use crate::partial_tz::PartialAnswer;

/// Totals and maxima of per-query work; merging is associative and
/// order-independent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpStats {
    pub queries: u64,
    pub q_evals: u64,
    pub splices: u64,
    pub tree_steps: u64,
    /// Cluster membership probes of the cover emulator's scale search.
    pub probes: u64,
    /// Edges of the emitted paths.
    pub hops: u64,
    pub max_q_evals: u64,
    pub max_splices: u64,
    pub max_tree_steps: u64,
    pub max_probes: u64,
    pub max_hops: u64,
}

impl OpStats {
    pub(crate) fn record(&mut self, ops: &QueryOps, probes: usize, hops: usize) {
        let (q, s, t, p, h) = (ops.q_evals as u64, ops.splices as u64, ops.tree_steps as u64, probes as u64, hops as u64);
        self.queries += 1;
        self.q_evals += q;
        self.splices += s;
        self.tree_steps += t;
        self.probes += p;
        self.hops += h;
        self.max_q_evals = self.max_q_evals.max(q);
        self.max_splices = self.max_splices.max(s);
        self.max_tree_steps = self.max_tree_steps.max(t);
        self.max_probes = self.max_probes.max(p);
        self.max_hops = self.max_hops.max(h);
    }

    pub(crate) fn merge(mut self, o: &OpStats) -> Self {
        self.queries += o.queries;
        self.q_evals += o.q_evals;
        self.splices += o.splices;
        self.tree_steps += o.tree_steps;
        self.probes += o.probes;
        self.hops += o.hops;
        self.max_q_evals = self.max_q_evals.max(o.max_q_evals);
        self.max_splices = self.max_splices.max(o.max_splices);
        self.max_tree_steps = self.max_tree_steps.max(o.max_tree_steps);
        self.max_probes = self.max_probes.max(o.max_probes);
        self.max_hops = self.max_hops.max(o.max_hops);
        self
    }

    /// Work per query before path emission, averaged.
    pub fn mean_work(&self) -> f64 {
        if self.queries == 0 {
            return 0.0;
        }
        (self.q_evals + self.splices + self.tree_steps + self.probes) as f64 / self.queries as f64
    }
}

pub(crate) enum Answer {
    Path(PathResult),
    Partial(PartialAnswer),
}

impl Answer {
    fn hops(&self) -> usize {
        match self {
            Answer::Path(p) | Answer::Partial(PartialAnswer::Direct(p)) => p.hops(),
            Answer::Partial(PartialAnswer::Escape { from_u, from_v }) => from_u.hops() + from_v.hops(),
        }
    }
}

/// One query with its work counts, or `None` for structures without queries.
pub(crate) fn answer(f: &OracleFile, u: VertexId, v: VertexId) -> Option<(Result<Answer, QueryError>, QueryOps, usize)> {
    let g = &f.graph;
    let mut ops = QueryOps::default();
    let mut probes = 0;
    let res = match &f.structure {
        Structure::Hopset(_) => return None,
        Structure::PartialTz(o) => {
            if (u as usize) >= g.n() || (v as usize) >= g.n() {
                Err(QueryError::OutOfRange(u.max(v)))
            } else {
                let (a, evals) = o.partial_query_counted(g, u, v);
                ops.q_evals = evals;
                Ok(Answer::Partial(a))
            }
        }
        Structure::Prdo(p) => p.query_counted(g, u, v, &mut ops).map(Answer::Path),
        Structure::Tz(e) => {
            let (r, evals) = e.query_counted(u, v);
            ops.q_evals = evals;
            r.map(Answer::Path)
        }
        Structure::Ap(e) => {
            let r = crate::emulator::InteractiveEmulator::query(e, u, v);
            if r.is_ok() && u != v {
                probes = e.scale_for_counted(u, v).1;
            }
            r.map(Answer::Path)
        }
        s => match (s.oracle(), s.emulator()) {
            (Some(o), _) => o.query(g, u, v).map(Answer::Path),
            (_, Some(e)) => e.query(u, v).map(Answer::Path),
            _ => unreachable!("every other structure answers queries"),
        },
    };
    Some((res, ops, probes))
}

pub(crate) fn record(stats: &mut OpStats, res: &Result<Answer, QueryError>, ops: &QueryOps, probes: usize) {
    let hops = res.as_ref().map_or(0, Answer::hops);
    stats.record(ops, probes, hops);
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub construction: String,
    pub n: usize,
    pub queries: usize,
    pub repetitions: usize,
    /// Work counts of one pass over the queries.
    pub ops: OpStats,
    pub mean_work: f64,
    /// Nanoseconds per query in each repetition.
    pub ns_per_query: Vec<f64>,
    pub best_ns_per_query: f64,
    pub failed_queries: usize,
}

/// Runs the queries `repetitions` times on one thread; work counts come from
/// the first pass and wall time from every pass.
pub fn bench(f: &OracleFile, queries: &[(VertexId, VertexId)], repetitions: usize) -> BenchReport {
    let mut ops = OpStats::default();
    let mut failed = 0;
    for &(u, v) in queries {
        if let Some((res, q, p)) = answer(f, u, v) {
            failed += res.is_err() as usize;
            record(&mut ops, &res, &q, p);
        }
    }
    let mut ns = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        for &(u, v) in queries {
            std::hint::black_box(answer(f, u, v));
        }
        ns.push(start.elapsed().as_nanos() as f64 / queries.len().max(1) as f64);
    }
    BenchReport {
        construction: f.spec.construction.to_string(),
        n: f.graph.n(),
        queries: queries.len(),
        repetitions,
        mean_work: ops.mean_work(),
        ops,
        best_ns_per_query: ns.iter().copied().fold(f64::INFINITY, f64::min),
        ns_per_query: ns,
        failed_queries: failed,
    }
}

/// Size in words per component, keyed `total` for the whole structure.
pub(crate) fn size_breakdown(f: &OracleFile) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    let total = f.structure.size_words();
    out.insert("total".to_string(), total);
    match &f.structure {
        Structure::Preserver(p) => {
            let hs = p.hopset().size_words();
            out.insert("hopset".into(), hs);
            out.insert("paths".into(), total - hs);
        }
        Structure::Prdo(Prdo::Composed(c)) => {
            out.insert("partial".into(), c.d0.size_words());
            out.insert("emulator".into(), c.emulator.get().size_words());
            out.insert("preserver".into(), c.preserver.size_words());
            out.insert("escape".into(), c.escape.len());
        }
        Structure::Prdo(Prdo::Partitioned(w)) => {
            let inner = w.inner.size_words();
            out.insert("inner".into(), inner);
            out.insert("wrap".into(), total - inner);
        }
        _ => {}
    }
    out
}

/// Size breakdown, build accounting and counting passes over the stored
/// structure.
pub fn stats(f: &OracleFile) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = f.info.iter().cloned().collect();
    for (k, v) in size_breakdown(f) {
        out.insert(format!("size_words.{k}"), v as f64);
    }
    let n = f.graph.n() as f64;
    out.insert("n".into(), n);
    out.insert("m".into(), f.graph.m() as f64);
    match &f.structure {
        Structure::Preserver(p) => {
            let st = p.stored_path_stats();
            out.insert("edges".into(), p.edge_set().len() as f64);
            out.insert("support".into(), p.hopset().support().len() as f64);
            out.insert("hop_edges".into(), p.hopset().len() as f64);
            out.insert("max_path_steps".into(), st.max_steps as f64);
            out.insert("r_missing".into(), st.max_outside_support as f64);
        }
        Structure::Hopset(h) => {
            out.insert("support".into(), h.support().len() as f64);
            out.insert("hop_edges".into(), h.len() as f64);
        }
        Structure::Prdo(Prdo::Partitioned(w)) => {
            let edges = w.edge_set().len() as f64;
            let clusters = w.cluster_count() as f64;
            let tree = n - clusters;
            let c = (edges - tree).max(0.0) * w.t as f64 / n.max(1.0);
            out.insert("spanner_edges".into(), edges);
            out.insert("tree_edges".into(), tree);
            out.insert("witness_edges".into(), edges - tree);
            out.insert("c".into(), c);
            out.insert("n_plus_c_n_over_t".into(), n + c * n / w.t as f64);
        }
        _ => {}
    }
    out
}
