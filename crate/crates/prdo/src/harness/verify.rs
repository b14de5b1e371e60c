//! Ground-truth verification: every answer is validated and compared with
//! exact distances, then the structure's own invariants are re-checked.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bench::{answer, record, size_breakdown, Answer};
use super::{OpStats, OracleFile, Structure};
use crate::composer::{check_partition, Emulator, Prdo};
use crate::emulator::{ApEmulator, EmulatorEdges, MnEmulator, CONTRACTION_BOUND};
use crate::graph::{dijkstra_sssp, validate_path, RealEdgeSet, VertexId, WeightedGraph};
use crate::hierarchy::{branch_bound, build_hierarchy, bunches, count_branching_events, half_bunch_pairs};
use crate::oracle::InteractiveOracle;
use crate::partial_tz::{PartialAnswer, PartialTz};
use crate::preserver::{beta_l, three_eps_cap, verify_hopset, Hopset};
use crate::util::le_tol;

/// Failure descriptions kept in a report, smallest first.
const MAX_FAILURES: usize = 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckCount {
    pub pass: u64,
    pub fail: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub construction: String,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub k: u32,
    pub eps: f64,
    pub queries: usize,
    pub checks: BTreeMap<String, CheckCount>,
    pub failures: Vec<String>,
    /// Largest answer weight over distance among pairs with positive distance.
    pub max_stretch: f64,
    pub declared_stretch: Option<f64>,
    pub size_words: BTreeMap<String, usize>,
    pub ops: OpStats,
    /// Measured constants and build accounting.
    pub metrics: BTreeMap<String, f64>,
    /// Wall time of the run; [`VerificationReport::without_timing`] clears it.
    pub wall_ms: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.values().all(|c| c.fail == 0)
    }

    pub fn total_checks(&self) -> u64 {
        self.checks.values().map(|c| c.pass + c.fail).sum()
    }

    /// The report with its only run-dependent field zeroed.
    pub fn without_timing(mut self) -> Self {
        self.wall_ms = 0.0;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `key<TAB>value` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k}\t{v}\n"));
        line("construction", self.construction.clone());
        line("n", self.n.to_string());
        line("m", self.m.to_string());
        line("seed", self.seed.to_string());
        line("k", self.k.to_string());
        line("eps", self.eps.to_string());
        line("queries", self.queries.to_string());
        line("passed", self.passed().to_string());
        for (name, c) in &self.checks {
            line(&format!("check.{name}.pass"), c.pass.to_string());
            line(&format!("check.{name}.fail"), c.fail.to_string());
        }
        line("max_stretch", self.max_stretch.to_string());
        if let Some(s) = self.declared_stretch {
            line("declared_stretch", s.to_string());
        }
        for (name, w) in &self.size_words {
            line(&format!("size_words.{name}"), w.to_string());
        }
        let o = &self.ops;
        for (name, v) in [
            ("q_evals", o.q_evals),
            ("splices", o.splices),
            ("tree_steps", o.tree_steps),
            ("probes", o.probes),
            ("hops", o.hops),
            ("max_q_evals", o.max_q_evals),
            ("max_splices", o.max_splices),
            ("max_tree_steps", o.max_tree_steps),
            ("max_probes", o.max_probes),
            ("max_hops", o.max_hops),
        ] {
            line(&format!("ops.{name}"), v.to_string());
        }
        for (name, v) in &self.metrics {
            line(&format!("metric.{name}"), v.to_string());
        }
        for f in &self.failures {
            line("failure", f.clone());
        }
        line("wall_ms", format!("{:.3}", self.wall_ms));
        out
    }
}

/// Partial results of a worker.
#[derive(Default)]
struct Acc {
    checks: BTreeMap<String, CheckCount>,
    failures: Vec<String>,
    max_stretch: f64,
    ops: OpStats,
    /// Set only by the structure pass.
    metrics: BTreeMap<String, f64>,
}

impl Acc {
    fn check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        let c = self.checks.entry(name.to_string()).or_default();
        if ok {
            c.pass += 1;
        } else {
            c.fail += 1;
            self.failures.push(format!("{name}: {}", detail()));
        }
    }

    fn count(&mut self, name: &str, pass: u64, fail: u64) {
        let c = self.checks.entry(name.to_string()).or_default();
        c.pass += pass;
        c.fail += fail;
    }

    fn merge(mut self, o: Acc) -> Acc {
        for (k, c) in o.checks {
            let e = self.checks.entry(k).or_default();
            e.pass += c.pass;
            e.fail += c.fail;
        }
        self.failures.extend(o.failures);
        self.failures.sort();
        self.failures.truncate(MAX_FAILURES);
        self.max_stretch = self.max_stretch.max(o.max_stretch);
        self.ops = self.ops.merge(&o.ops);
        self.metrics.extend(o.metrics);
        self
    }

    /// Lower bound, upper bound and stretch of one path weight.
    fn weight(&mut self, name: &str, u: VertexId, v: VertexId, w: f64, d: f64, bound: f64) {
        self.check("lower", le_tol(d, w), || format!("({u},{v}) weight {w} below distance {d}"));
        self.check(name, le_tol(w, bound * d), || format!("({u},{v}) weight {w} exceeds {bound} x {d}"));
        if d > 0.0 {
            self.max_stretch = self.max_stretch.max(w / d);
        }
    }
}

/// Worker count from `PRDO_WORKERS`, or 0 for rayon's default.
pub fn workers_from_env() -> usize {
    std::env::var("PRDO_WORKERS").ok().and_then(|s| s.parse().ok()).unwrap_or(0)
}

/// Verifies `queries` against Dijkstra distances on `workers` threads
/// (0 for the default) and re-checks structural invariants.
pub fn verify(f: &OracleFile, queries: &[(VertexId, VertexId)], workers: usize) -> VerificationReport {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
    let acc = pool.install(|| {
        let per_query = check_queries(f, queries);
        per_query.merge(check_structure(f, queries))
    });
    let g = &f.graph;
    let mut metrics: BTreeMap<String, f64> = f.info.iter().cloned().collect();
    metrics.extend(structure_metrics(f));
    metrics.extend(acc.metrics);
    let declared = f
        .structure
        .oracle()
        .map(|o| o.declared_stretch())
        .or_else(|| f.structure.emulator().map(|e| e.declared_stretch()));
    if matches!(f.structure, Structure::Mn(_)) {
        metrics.insert("measured_stretch_over_k".into(), acc.max_stretch / f.spec.k as f64);
    }
    VerificationReport {
        construction: f.spec.construction.to_string(),
        n: g.n(),
        m: g.m(),
        seed: f.spec.seed,
        k: f.spec.k,
        eps: f.spec.eps,
        queries: queries.len(),
        checks: acc.checks,
        failures: acc.failures,
        max_stretch: acc.max_stretch,
        declared_stretch: declared,
        size_words: size_breakdown(f),
        ops: acc.ops,
        metrics,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Distance rows for every distinct query source.
fn distance_rows(g: &WeightedGraph, queries: &[(VertexId, VertexId)]) -> HashMap<VertexId, Vec<f64>> {
    let mut sources: Vec<VertexId> = queries.iter().map(|q| q.0).filter(|&u| (u as usize) < g.n()).collect();
    sources.sort_unstable();
    sources.dedup();
    sources.par_iter().map(|&s| (s, dijkstra_sssp(g, s).dist)).collect()
}

fn check_queries(f: &OracleFile, queries: &[(VertexId, VertexId)]) -> Acc {
    let g = &f.graph;
    if matches!(f.structure, Structure::Hopset(_)) {
        return Acc::default();
    }
    let rows = distance_rows(g, queries);
    let edges: Vec<u32> = f.structure.oracle().map(|o| o.edge_set()).unwrap_or_else(|| match &f.structure {
        Structure::PartialTz(o) => o.edge_set(),
        _ => Vec::new(),
    });
    let real = RealEdgeSet::subset(g, edges);
    let emu = f.structure.emulator().map(EmulatorEdges::new);
    let declared = f
        .structure
        .oracle()
        .map(|o| o.declared_stretch())
        .or_else(|| f.structure.emulator().map(|e| e.declared_stretch()))
        .unwrap_or(f64::INFINITY);
    queries
        .par_iter()
        .fold(Acc::default, |mut acc, &(u, v)| {
            let in_range = (u as usize) < g.n() && (v as usize) < g.n();
            acc.check("in_range", in_range, || format!("({u},{v}) outside 0..{}", g.n()));
            if !in_range {
                return acc;
            }
            let d = rows[&u][v as usize];
            let (res, ops, probes) = answer(f, u, v).expect("structure answers queries");
            record(&mut acc.ops, &res, &ops, probes);
            let a = match res {
                Ok(a) => a,
                Err(e) => {
                    acc.check("answer", false, || format!("({u},{v}) {e}"));
                    return acc;
                }
            };
            acc.check("answer", true, String::new);
            match a {
                Answer::Path(p) => {
                    let valid = match &emu {
                        Some(es) => validate_path(es, &p, u, v),
                        None => validate_path(&real, &p, u, v),
                    };
                    match valid {
                        Ok(w) => {
                            acc.check("path", true, String::new);
                            acc.weight("stretch", u, v, w, d, declared);
                        }
                        Err(e) => acc.check("path", false, || format!("({u},{v}) {e}")),
                    }
                }
                Answer::Partial(pa) => {
                    let Structure::PartialTz(o) = &f.structure else { unreachable!() };
                    check_partial(&mut acc, o, &real, u, v, d, pa, ops.q_evals);
                }
            }
            acc
        })
        .reduce(Acc::default, Acc::merge)
}

/// Direct answers within `(2h+1)d`, escape legs within `h·d` ending in the
/// escape set, and at most `2(⌈log₂ h⌉+2)` predicate evaluations.
#[allow(clippy::too_many_arguments)]
fn check_partial(acc: &mut Acc, o: &PartialTz, real: &RealEdgeSet, u: VertexId, v: VertexId, d: f64, a: PartialAnswer, evals: usize) {
    let h = o.h as f64;
    let bound = 2 * ((h.log2().ceil() as usize) + 2);
    acc.check("q_evals", evals <= bound, || format!("({u},{v}) used {evals} > {bound} evaluations"));
    match a {
        PartialAnswer::Direct(p) => match validate_path(real, &p, u, v) {
            Ok(w) => {
                acc.check("path", true, String::new);
                acc.weight("direct_stretch", u, v, w, d, 2.0 * h + 1.0);
            }
            Err(e) => acc.check("path", false, || format!("({u},{v}) {e}")),
        },
        PartialAnswer::Escape { from_u, from_v } => {
            for (x, leg) in [(u, from_u), (v, from_v)] {
                let y = leg.target();
                acc.check("escape_target", o.hierarchy().in_level(y, o.h), || format!("({u},{v}) leg ends at {y}"));
                match validate_path(real, &leg, x, y) {
                    Ok(w) => {
                        acc.check("path", true, String::new);
                        acc.check("escape_leg", le_tol(w, h * d), || format!("({u},{v}) leg {w} exceeds {h} x {d}"));
                    }
                    Err(e) => acc.check("path", false, || format!("({u},{v}) {e}")),
                }
            }
        }
    }
}

/// Branching events of each level's half-bunch pairs against the cube bound.
fn check_branching(acc: &mut Acc, g: &WeightedGraph, hs: &Hopset, seed: u64) {
    let h = build_hierarchy(g, &hs.probs, seed);
    let full = bunches(&h, g, 1.0);
    let half = bunches(&h, g, 0.5);
    for i in 0..h.l() {
        let events = count_branching_events(g, &half_bunch_pairs(&h, &half, i)) as u128;
        let bound = branch_bound(&h, &full, i);
        acc.check("branching", events <= bound, || format!("level {i}: {events} events > bound {bound}"));
    }
}

fn check_mn(acc: &mut Acc, e: &MnEmulator) {
    for (j, l) in e.hier.levels.iter().enumerate() {
        let dist = l.tree.distortion;
        acc.check("contraction", (1.0..=CONTRACTION_BOUND).contains(&dist), || format!("round {j}: distortion {dist}"));
    }
}

fn check_ap(acc: &mut Acc, e: &ApEmulator) {
    match e.check_covers() {
        Ok(c) => acc.count("cover", c as u64, 0),
        Err(err) => acc.check("cover", false, || err.to_string()),
    }
}

fn check_prdo(acc: &mut Acc, g: &WeightedGraph, p: &Prdo) {
    match p {
        Prdo::Composed(c) => match &c.emulator {
            Emulator::Mn(e) => check_mn(acc, e),
            Emulator::Ap(e) => check_ap(acc, e),
            Emulator::Tz(_) => {}
        },
        Prdo::Partitioned(w) => {
            match check_partition(g, &w.partition(g)) {
                Ok(r) => acc.count("partition", r.edges_checked as u64, 0),
                Err(e) => acc.check("partition", false, || e.to_string()),
            }
            let edges = w.edge_set().len();
            let cap = g.n() - w.cluster_count() + w.inner.edge_set().len();
            acc.check("spanner_edges", edges <= cap, || format!("{edges} edges > tree edges plus inner edges {cap}"));
            check_prdo(acc, &w.cluster_graph.graph, &w.inner);
        }
        Prdo::Table(_) => {}
    }
}

fn check_structure(f: &OracleFile, queries: &[(VertexId, VertexId)]) -> Acc {
    let g = &f.graph;
    let mut acc = Acc::default();
    match &f.structure {
        Structure::Preserver(p) => {
            check_branching(&mut acc, g, p.hopset(), f.spec.seed);
            let st = p.stored_path_stats();
            acc.check("hop_cap", st.max_steps as u64 <= p.hop_cap, || {
                format!("stored path of {} steps exceeds cap {}", st.max_steps, p.hop_cap)
            });
        }
        Structure::Hopset(hs) => {
            check_branching(&mut acc, g, hs, f.spec.seed);
            let eps = f.spec.eps;
            for (name, alpha, beta) in [
                ("hopset", 1.0 + eps, beta_l(hs.levels, eps)),
                ("hopset_3eps", 3.0 + eps, three_eps_cap(hs.levels, eps)),
            ] {
                let r = verify_hopset(g, hs, alpha, beta, queries);
                acc.count(name, (r.pairs - r.violations.len()) as u64, 0);
                for &(u, v, d, w) in &r.violations {
                    acc.check(name, false, || format!("({u},{v}) {w} within {beta} hops vs {alpha} x {d}"));
                }
                acc.max_stretch = acc.max_stretch.max(r.max_stretch);
                acc.metrics.insert(format!("{name}.beta"), beta as f64);
                acc.metrics.insert(format!("{name}.min_sufficient_beta"), r.min_sufficient_beta as f64);
            }
        }
        Structure::Mn(e) => check_mn(&mut acc, e),
        Structure::Ap(e) => check_ap(&mut acc, e),
        Structure::Prdo(p) => check_prdo(&mut acc, g, p),
        _ => {}
    }
    acc
}

/// Constants measured from the stored structure.
fn structure_metrics(f: &OracleFile) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let g = &f.graph;
    let mn = |e: &MnEmulator, out: &mut BTreeMap<String, f64>| {
        let ratio = e.hier.levels.iter().map(|l| l.ratio).fold(1.0, f64::max);
        let dist = e.hier.levels.iter().map(|l| l.tree.distortion).fold(1.0, f64::max);
        out.insert("mn_rounds".into(), e.hier.levels.len() as f64);
        out.insert("mn_ramsey_ratio".into(), ratio);
        out.insert("mn_contraction".into(), dist);
    };
    match &f.structure {
        Structure::Mn(e) => mn(e, &mut out),
        Structure::Prdo(Prdo::Composed(c)) => {
            if let Emulator::Mn(e) = &c.emulator {
                mn(e, &mut out);
            }
        }
        Structure::Prdo(Prdo::Partitioned(w)) => {
            let p = w.partition(g);
            out.insert("c_t".into(), p.c_t());
            if let Prdo::Composed(c) = w.inner.as_ref() {
                if let Emulator::Mn(e) = &c.emulator {
                    mn(e, &mut out);
                }
            }
        }
        _ => {}
    }
    out
}
