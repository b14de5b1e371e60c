//! Acceptance suite: one PASS or FAIL line per criterion, nonzero exit on
//! any failure. Every criterion checks answers against exact distances or
//! against a check written here, independent of the library's own checkers.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use ordered_float::OrderedFloat;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prdo::composer::{
    build_preset, build_stretch_friendly_partition, check_partition, compose_with_partition, inner_oracle, ultra_t,
    EmulatorKind, Prdo, Preset, PreserverChoice,
};
use prdo::emulator::{
    coarsen_cover, gupta_contract, hst_edge_weights, neighborhood_cover, ContractedTree, Hst, WeightedTree,
};
use prdo::gen::{erdos_renyi, grid, random_geometric};
use prdo::graph::{all_pairs, VertexId, WeightedGraph};
use prdo::harness::{
    all_pairs_list, build, default_queries, random_pairs, stats, verify, BuildSpec, Construction, OracleFile,
    Structure, VerificationReport,
};
use prdo::hierarchy::{branch_bound, build_hierarchy, bunches, count_branching_events, half_bunch_pairs};
use prdo::oracle::InteractiveOracle;
use prdo::preserver::{three_eps_cap, v1_probs};

const NONE: u32 = u32::MAX;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

/// Pass and fail totals over many verification reports.
#[derive(Default)]
struct Tally {
    reports: usize,
    queries: usize,
    checks: u64,
    failed: u64,
    max_stretch: f64,
    first_failure: Option<String>,
}

impl Tally {
    fn add(&mut self, label: &str, r: &VerificationReport) {
        self.reports += 1;
        self.queries += r.queries;
        self.checks += r.total_checks();
        self.failed += r.checks.values().map(|c| c.fail).sum::<u64>();
        self.max_stretch = self.max_stretch.max(r.max_stretch);
        if self.first_failure.is_none() {
            if let Some(f) = r.failures.first() {
                self.first_failure = Some(format!("{label}: {f}"));
            }
        }
    }

    fn summary(&self) -> String {
        let mut s = format!(
            "{} runs, {} queries, {} checks, {} failed, max stretch {:.4}",
            self.reports, self.queries, self.checks, self.failed, self.max_stretch
        );
        if let Some(f) = &self.first_failure {
            s.push_str(&format!("; first failure {f}"));
        }
        s
    }
}

fn er(n: usize, p: f64, seed: u64) -> WeightedGraph {
    erdos_renyi(n, p, 1..100, true, seed)
}

fn build_and_verify(g: &WeightedGraph, spec: &BuildSpec, queries: Option<&[(VertexId, VertexId)]>) -> (OracleFile, VerificationReport) {
    let f = build(g, spec).unwrap_or_else(|e| panic!("{}: {e}", spec.construction));
    let q = queries.map(<[_]>::to_vec).unwrap_or_else(|| default_queries(&f));
    let r = verify(&f, &q, 0);
    (f, r)
}

fn exactness() -> Outcome {
    let mut t = Tally::default();
    for s in 0..20u64 {
        let g = er(200, 0.03, s);
        let mut spec = BuildSpec::new(Construction::Exact, 4, 0.5, s);
        spec.demand = random_pairs(200, 300, s);
        let (_, r) = build_and_verify(&g, &spec, None);
        t.add("exact", &r);
        let mut spec = BuildSpec::new(Construction::Pivot, 4, 0.5, s);
        spec.level = 1 + s as usize % 3;
        let (_, r) = build_and_verify(&g, &spec, None);
        t.add("pivot", &r);
    }
    outcome(t.failed == 0 && t.queries >= 10_000 && t.max_stretch <= 1.0 + 1e-9, t.summary())
}

fn eps_preservers() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for c in [Construction::V1, Construction::V2] {
        let mut t = Tally::default();
        let mut i = 0;
        for eps in [1.0, 0.5, 0.25] {
            for k in [3u32, 4, 6] {
                i += 1;
                let g = er(150, 0.04, 100 + i);
                let mut spec = BuildSpec::new(c, k, eps, i);
                spec.demand = random_pairs(150, 600, i);
                let (f, r) = build_and_verify(&g, &spec, None);
                let bound = match &f.structure {
                    Structure::Preserver(p) => p.stretch,
                    _ => unreachable!(),
                };
                let expected = if c == Construction::V1 { 1.0 + eps } else { (1.0 + eps / 3.0).powi(2) };
                ok &= bound <= 1.0 + eps + 1e-12 && (bound - expected).abs() < 1e-12;
                t.add(&format!("{c} eps={eps} k={k}"), &r);
            }
        }
        ok &= t.failed == 0 && t.queries >= 5_000;
        parts.push(format!("{c}: {}", t.summary()));
    }
    outcome(ok, parts.join(" | "))
}

fn three_eps_preserver() -> Outcome {
    let mut t = Tally::default();
    let mut ok = true;
    let mut worst_hops = 0.0f64;
    let mut i = 0;
    for eps in [1.0, 0.5, 0.25] {
        for k in [3u32, 4, 6] {
            i += 1;
            let g = er(150, 0.04, 200 + i);
            let mut spec = BuildSpec::new(Construction::ThreeEps, k, eps, i);
            spec.demand = random_pairs(150, 600, i);
            let (f, r) = build_and_verify(&g, &spec, None);
            let Structure::Preserver(p) = &f.structure else { unreachable!() };
            let cap = three_eps_cap(p.hopset().levels, eps);
            let steps = p.stored_path_stats().max_steps as u64;
            ok &= p.hop_cap == cap && steps <= cap && r.declared_stretch == Some(3.0 + eps);
            worst_hops = worst_hops.max(steps as f64 / cap as f64);
            t.add(&format!("eps={eps} k={k}"), &r);
        }
    }
    ok &= t.failed == 0;
    outcome(ok, format!("{}, largest stored hops / cap {:.2e}", t.summary(), worst_hops))
}

fn hopset_property() -> Outcome {
    let mut t = Tally::default();
    let (mut beta, mut min_beta, mut min_beta3) = (0.0f64, 0.0f64, 0.0f64);
    for s in 0..10u64 {
        let g = er(150, 0.04, 300 + s);
        let spec = BuildSpec::new(Construction::Hopset, 4, 1.0, s);
        let pairs: Vec<_> = all_pairs_list(150).into_iter().filter(|&(u, v)| u < v).collect();
        let (_, r) = build_and_verify(&g, &spec, Some(&pairs));
        beta = r.metrics["hopset.beta"];
        min_beta = min_beta.max(r.metrics["hopset.min_sufficient_beta"]);
        min_beta3 = min_beta3.max(r.metrics["hopset_3eps.min_sufficient_beta"]);
        let checked = r.checks.get("hopset").map_or(0, |c| c.pass + c.fail) as usize;
        let checked3 = r.checks.get("hopset_3eps").map_or(0, |c| c.pass + c.fail) as usize;
        assert!(checked == pairs.len() && checked3 == pairs.len());
        t.add(&format!("graph {s}"), &r);
    }
    outcome(
        t.failed == 0,
        format!(
            "{}; beta {beta:.3e}, largest minimal sufficient beta {min_beta} (1+eps) and {min_beta3} (3+eps)",
            t.summary()
        ),
    )
}

fn branching_events() -> Outcome {
    let (mut instances, mut levels, mut violations) = (0, 0, 0);
    let mut tightest = 0.0f64;
    for s in 0..66u64 {
        let n = [40, 80, 120][s as usize % 3];
        let k = [3u32, 4, 6][(s as usize / 3) % 3];
        let g = match s % 3 {
            0 => er(n, 6.0 / n as f64, s),
            1 => grid(n / 10, 10, 1..20, s),
            _ => random_geometric(n, 0.25, s),
        };
        let h = build_hierarchy(&g, &v1_probs(g.n(), k), s);
        let full = bunches(&h, &g, 1.0);
        let half = bunches(&h, &g, 0.5);
        instances += 1;
        for i in 0..h.l() {
            levels += 1;
            let events = count_branching_events(&g, &half_bunch_pairs(&h, &half, i)) as u128;
            let bound = branch_bound(&h, &full, i);
            if events > bound {
                violations += 1;
            } else if bound > 0 {
                tightest = tightest.max(events as f64 / bound as f64);
            }
        }
    }
    outcome(
        violations == 0 && instances >= 60,
        format!("{instances} hierarchies, {levels} levels, {violations} violations, largest events/bound {tightest:.3}"),
    )
}

fn expected_sizes() -> Outcome {
    // Worst mean/bound ratio per inequality.
    let mut worst = [0.0f64; 4];
    let seeds = 24u64;
    for (n, k) in [(200usize, 3u32), (200, 4), (300, 4)] {
        let g = er(n, 6.0 / n as f64, n as u64 + k as u64);
        let probs = v1_probs(n, k);
        let l = probs.len() + 1;
        let mut sum_h = vec![0.0; l];
        let mut sum_b = vec![0.0; l];
        for s in 0..seeds {
            let h = build_hierarchy(&g, &probs, 1000 + s);
            let full = bunches(&h, &g, 1.0);
            let half = bunches(&h, &g, 0.5);
            for i in 0..l {
                let mut pairs = BTreeSet::new();
                for &v in h.level(i) {
                    for (u, _) in full.extended_bunch(&h, i, v) {
                        pairs.insert((v.min(u), v.max(u)));
                    }
                }
                sum_h[i] += pairs.len() as f64;
                sum_b[i] += count_branching_events(&g, &half_bunch_pairs(&h, &half, i)) as f64;
            }
        }
        let q = &probs;
        let prod = |i: usize| q[..i].iter().product::<f64>();
        let top = (n as f64 * prod(l - 1)).max(1.0);
        for i in 0..l {
            let (mh, mb) = (sum_h[i] / seeds as f64, sum_b[i] / seeds as f64);
            if i < l - 1 {
                worst[0] = worst[0].max(mh / (n as f64 / q[i] * prod(i)));
                worst[2] = worst[2].max(mb / (24.0 * n as f64 / q[i].powi(3) * prod(i)));
            } else {
                worst[1] = worst[1].max(mh / (2.0 * top.powi(2)));
                worst[3] = worst[3].max(mb / (60.0 * top.powi(4)));
            }
        }
    }
    outcome(
        worst.iter().all(|&w| w <= 3.0),
        format!(
            "mean/bound over {seeds} seeds: bunch edges {:.3}, top bunch edges {:.3}, branching {:.4}, top branching {:.4}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn partial_tz_dichotomy() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for h in [2usize, 4] {
        let mut t = Tally::default();
        let mut escapes = 0u64;
        let mut max_evals = 0;
        let mut evals = 0;
        for s in 0..10u64 {
            let g = er(200, 0.03, 400 + s);
            let mut spec = BuildSpec::new(Construction::PartialTz, 8, 0.5, s);
            spec.h = Some(h);
            let (_, r) = build_and_verify(&g, &spec, Some(&all_pairs_list(200)));
            escapes += r.checks.get("escape_target").map_or(0, |c| c.pass) / 2;
            max_evals = max_evals.max(r.ops.max_q_evals);
            evals += r.ops.q_evals;
            t.add(&format!("h={h} graph {s}"), &r);
        }
        let bound = 2 * ((h as f64).log2().ceil() as u64 + 2);
        ok &= t.failed == 0 && max_evals <= bound;
        parts.push(format!(
            "h={h}: {}, {escapes} escapes, Q-evaluations mean {:.2} max {max_evals} (bound {bound})",
            t.summary(),
            evals as f64 / t.queries as f64
        ));
    }
    outcome(ok, parts.join(" | "))
}

fn emulator_soundness() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut mn_const = 0.0f64;
    for kind in [EmulatorKind::Tz, EmulatorKind::Ap, EmulatorKind::Mn] {
        let mut t = Tally::default();
        for (s, k) in [(0u64, 2u32), (1, 3), (2, 4)] {
            let g = er(90, 0.06, 500 + s);
            let eps = 0.5;
            let (_, r) = build_and_verify(&g, &BuildSpec::new(Construction::Emulator(kind), k, eps, s), None);
            let declared = r.declared_stretch.unwrap();
            ok &= match kind {
                EmulatorKind::Tz => declared == (2 * k - 1) as f64,
                EmulatorKind::Ap => (declared - 4.0 * (1.0 + eps) * k as f64).abs() < 1e-12,
                EmulatorKind::Mn => {
                    mn_const = mn_const.max(r.max_stretch / k as f64);
                    r.max_stretch.is_finite() && declared.is_finite()
                }
            };
            ok &= r.checks["lower"].fail == 0;
            t.add(&format!("{kind:?} k={k}"), &r);
        }
        ok &= t.failed == 0;
        parts.push(format!("{kind:?}: {}", t.summary()));
    }
    parts.push(format!("mn measured stretch/k {mn_const:.3}"));
    outcome(ok, parts.join(" | "))
}

/// Random HST: recursive splits into 2 to 8 parts with shrinking labels.
fn random_hst(leaves: usize, r: &mut ChaCha8Rng) -> Hst {
    let mut t = Hst { parent: vec![NONE], label: vec![1.0e6], point: vec![NONE] };
    let mut stack = vec![(0u32, leaves)];
    let mut next = 0;
    while let Some((x, m)) = stack.pop() {
        if m == 1 {
            t.label[x as usize] = 0.0;
            t.point[x as usize] = next;
            next += 1;
            continue;
        }
        let parts = r.gen_range(2..=8usize.min(m));
        let mut cuts: BTreeSet<usize> = (0..parts - 1).map(|_| r.gen_range(1..m)).collect();
        cuts.extend([0, m]);
        let cuts: Vec<usize> = cuts.into_iter().collect();
        for w in cuts.windows(2) {
            let id = t.parent.len() as u32;
            t.parent.push(x);
            t.label.push(t.label[x as usize] * r.gen_range(0.02..0.98));
            t.point.push(NONE);
            stack.push((id, w[1] - w[0]));
        }
    }
    t
}

/// Distances from `s` in a forest given by parent pointers and edge weights.
fn tree_distances(parent: &[u32], weight: &[f64], s: usize) -> Vec<f64> {
    let n = parent.len();
    let mut adj = vec![Vec::new(); n];
    for x in 0..n {
        if parent[x] != NONE {
            adj[x].push((parent[x] as usize, weight[x]));
            adj[parent[x] as usize].push((x, weight[x]));
        }
    }
    let mut d = vec![f64::INFINITY; n];
    d[s] = 0.0;
    let mut stack = vec![s];
    while let Some(x) = stack.pop() {
        for &(y, w) in &adj[x] {
            if d[y].is_infinite() {
                d[y] = d[x] + w;
                stack.push(y);
            }
        }
    }
    d
}

fn gupta_contraction() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let (mut lo, mut hi, mut pairs) = (f64::INFINITY, 0.0f64, 0u64);
    let mut bad = 0;
    for _ in 0..100 {
        let leaves = r.gen_range(2..=512);
        let hst = random_hst(leaves, &mut r);
        let tree: WeightedTree = hst_edge_weights(&hst).unwrap();
        let terms = hst.leaves();
        let c: ContractedTree = match gupta_contract(&tree, &terms) {
            Ok(c) => c,
            Err(_) => {
                bad += 1;
                continue;
            }
        };
        let index: Vec<usize> = {
            let mut idx = vec![usize::MAX; hst.len()];
            for (i, &x) in c.terminals.iter().enumerate() {
                idx[x as usize] = i;
            }
            terms.iter().map(|&x| idx[x as usize]).collect()
        };
        bad += (index.iter().any(|&i| i == usize::MAX) || c.terminals.len() != terms.len()) as usize;
        for (a, &ta) in terms.iter().enumerate() {
            let orig = tree_distances(&tree.parent, &tree.weight, ta as usize);
            let cont = tree_distances(&c.parent, &c.weight, index[a]);
            for (b, &tb) in terms.iter().enumerate().skip(a + 1) {
                let ratio = cont[index[b]] / orig[tb as usize];
                lo = lo.min(ratio);
                hi = hi.max(ratio);
                pairs += 1;
            }
        }
    }
    outcome(
        bad == 0 && lo >= 1.0 - 1e-9 && hi <= 8.0 + 1e-9,
        format!("100 HSTs, {pairs} leaf pairs, distortion range [{lo:.4}, {hi:.4}], {bad} failed contractions"),
    )
}

/// Radius of `G[members]` from `center`, infinite if some member is cut off.
fn induced_radius(g: &WeightedGraph, center: VertexId, members: &[VertexId]) -> f64 {
    let inside: HashSet<VertexId> = members.iter().copied().collect();
    let mut d = vec![f64::INFINITY; g.n()];
    let mut heap = BinaryHeap::new();
    d[center as usize] = 0.0;
    heap.push(Reverse((OrderedFloat(0.0), center)));
    while let Some(Reverse((OrderedFloat(dx), x))) = heap.pop() {
        if dx > d[x as usize] {
            continue;
        }
        for &(y, e) in g.neighbors(x) {
            let nd = dx + g.edge(e).w;
            if inside.contains(&y) && nd < d[y as usize] {
                d[y as usize] = nd;
                heap.push(Reverse((OrderedFloat(nd), y)));
            }
        }
    }
    members.iter().map(|&v| d[v as usize]).fold(0.0, f64::max)
}

fn cover_coarsening() -> Outcome {
    let (mut covers, mut violations) = (0, 0);
    let mut worst_radius = 0.0f64;
    let mut worst_membership = 0.0f64;
    for s in 0..8u64 {
        let g = er(80, 0.05, 600 + s);
        let dmax = all_pairs(&g).iter().flatten().fold(0.0f64, |a, &b| a.max(b));
        for frac in [0.05, 0.15, 0.4] {
            for k in [1u32, 2, 3, 5] {
                let input = neighborhood_cover(&g, dmax * frac);
                let cover = coarsen_cover(&g, &input, k).unwrap();
                covers += 1;
                let rad = input.iter().map(|(c, m)| induced_radius(&g, *c, m)).fold(0.0, f64::max);
                let mut count = vec![0usize; g.n()];
                for cl in &cover.clusters {
                    for &v in &cl.members {
                        count[v as usize] += 1;
                    }
                    let r = induced_radius(&g, cl.center, &cl.members);
                    if rad > 0.0 {
                        worst_radius = worst_radius.max(r / ((2 * k - 1) as f64 * rad));
                    }
                    violations += (r > (2 * k - 1) as f64 * rad * (1.0 + 1e-9)) as usize;
                }
                for (i, (_, m)) in input.iter().enumerate() {
                    let home = &cover.clusters[cover.home[i] as usize];
                    violations += m.iter().any(|&v| home.members.binary_search(&v).is_err()) as usize;
                }
                let cap = 2.0 * k as f64 * (input.len() as f64).powf(1.0 / k as f64);
                let most = *count.iter().max().unwrap() as f64;
                worst_membership = worst_membership.max(most / cap);
                violations += (most > cap) as usize;
            }
        }
    }
    // Covers stored inside cover emulators, re-checked scale by scale.
    let mut scales = 0;
    for s in 0..4u64 {
        let g = er(60, 0.08, 700 + s);
        let f = build(&g, &BuildSpec::new(Construction::Emulator(EmulatorKind::Ap), 2 + s as u32 % 2, 0.5, s)).unwrap();
        let Structure::Ap(e) = &f.structure else { unreachable!() };
        match e.check_covers() {
            Ok(c) => scales += c,
            Err(_) => violations += 1,
        }
    }
    outcome(
        violations == 0,
        format!(
            "{covers} coarsened covers plus {scales} emulator scales, {violations} violations, \
             largest radius/bound {worst_radius:.3}, largest membership/bound {worst_membership:.3}"
        ),
    )
}

fn composed_prdo() -> Outcome {
    let g = er(300, 0.02, 800);
    let pairs = all_pairs_list(300);
    let mut ok = true;
    let mut parts = Vec::new();
    let presets = [
        Preset::Composed(EmulatorKind::Tz, PreserverChoice::V1),
        Preset::Composed(EmulatorKind::Mn, PreserverChoice::ThreeEps),
        Preset::Composed(EmulatorKind::Ap, PreserverChoice::ThreeEps),
    ];
    for p in presets {
        for h in [None, Some(2)] {
            let mut spec = BuildSpec::new(Construction::Preset(p), 4, 0.5, 3);
            spec.h = h;
            let (f, r) = build_and_verify(&g, &spec, Some(&pairs));
            let mut t = Tally::default();
            t.add(&p.to_string(), &r);
            ok &= t.failed == 0 && r.checks["path"].pass == pairs.len() as u64;
            parts.push(format!(
                "{p} h={} |S|={} |H_E|={}: {} of declared {:.1}, {} splices",
                f.info("h").unwrap(),
                f.info("escape").unwrap(),
                f.info("emulator_edges").unwrap(),
                t.summary(),
                r.declared_stretch.unwrap(),
                r.ops.splices
            ));
        }
    }
    outcome(ok, parts.join(" | "))
}

fn stretch_friendly_wrap() -> Outcome {
    let mut ok = true;
    let mut edges_checked = 0;
    let mut partitions = 0;
    for s in 0..12u64 {
        let g = match s % 3 {
            0 => er(200, 0.03, 900 + s),
            1 => grid(15, 14, 1..30, s),
            _ => random_geometric(200, 0.15, s),
        };
        if !g.is_connected() {
            continue;
        }
        for t in [1usize, 2, 3, 5, 8] {
            let p = build_stretch_friendly_partition(&g, t).unwrap();
            match check_partition(&g, &p) {
                Ok(rep) => edges_checked += rep.edges_checked,
                Err(_) => ok = false,
            }
            partitions += 1;
        }
    }
    let g = er(200, 0.03, 950);
    let (k, eps, seed) = (4, 0.5, 7);
    let t = ultra_t(g.n());
    let k_inner = (g.n() as f64).log2().ceil() as u32;
    let standard = compose_with_partition(&g, t, |h| inner_oracle(h, k_inner, eps, seed)).unwrap();
    let ultra = build_preset(&g, Preset::Ultra, k, eps, seed).unwrap();
    let mut same = 0;
    for u in 0..g.n() as VertexId {
        for v in 0..g.n() as VertexId {
            same += (standard.query(&g, u, v).unwrap() == ultra.query(&g, u, v).unwrap()) as usize;
        }
    }
    let all = g.n() * g.n();
    let f = build(&g, &BuildSpec::new(Construction::Preset(Preset::Ultra), k, eps, seed)).unwrap();
    let r = verify(&f, &all_pairs_list(g.n()), 0);
    let st = stats(&f);
    let Prdo::Partitioned(w) = &ultra else { unreachable!() };
    ok &= same == all && r.passed() && st["spanner_edges"] <= st["n_plus_c_n_over_t"] + 1e-9;
    ok &= w.ultra && st["tree_edges"] <= g.n() as f64;
    outcome(
        ok,
        format!(
            "{partitions} partitions, {edges_checked} edge checks; ultra answers equal on {same}/{all} pairs; \
             ultra stretch max {:.3} of declared {:.1}; spanner edges {} <= n + c*n/t = {} with c = {:.3}, t = {t}",
            r.max_stretch,
            r.declared_stretch.unwrap(),
            st["spanner_edges"],
            st["n_plus_c_n_over_t"],
            st["c"]
        ),
    )
}

fn determinism() -> Outcome {
    let g = er(80, 0.06, 1000);
    let mut ok = true;
    let mut count = 0;
    for c in Construction::all() {
        let mut spec = BuildSpec::new(c, 4, 0.5, 42);
        spec.demand = random_pairs(80, 80, 42);
        let a = build(&g, &spec).unwrap();
        let b = build(&g, &spec).unwrap();
        let bytes = a.to_bytes();
        ok &= bytes == b.to_bytes();
        let q = default_queries(&a);
        let r1 = verify(&a, &q, 1).without_timing();
        let r2 = verify(&OracleFile::from_bytes(&bytes).unwrap(), &q, 4).without_timing();
        ok &= r1 == r2 && r1.to_json() == r2.to_json();
        count += 1;
    }
    outcome(ok, format!("{count} constructions rebuilt byte-identically; reports equal after reload across worker counts"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("exact and pivot preservers are exact", exactness),
        ("1+eps preservers", eps_preservers),
        ("3+eps preserver", three_eps_preserver),
        ("hopset property", hopset_property),
        ("branching events", branching_events),
        ("expected sizes", expected_sizes),
        ("partial oracle dichotomy", partial_tz_dichotomy),
        ("emulator soundness", emulator_soundness),
        ("tree contraction", gupta_contraction),
        ("cover coarsening", cover_coarsening),
        ("composed oracles", composed_prdo),
        ("stretch-friendly wrap", stretch_friendly_wrap),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        failed += !o.ok as usize;
        println!(
            "{} [{:>2}] {name}: {} ({:.1}s)",
            if o.ok { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
