//! Ramsey-style hierarchy: repeatedly build an ultrametric tree over the
//! remaining points, keep the points it approximates well from everywhere,
//! and recurse on the rest. Each round's tree is contracted onto its leaves
//! to give the emulator edges.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::hst::{gupta_contract, hst_edge_weights, ContractedTree, Hst};
use super::{check_point, forest_path, EmulatorError, InteractiveEmulator, MetricGraph};
use crate::graph::{PathResult, VertexId};
use crate::hierarchy::NONE;
use crate::oracle::QueryError;
use crate::util::{le_tol, rng};

/// Rounds retried before giving up on extracting any point.
const MAX_ATTEMPTS: u64 = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MnLevel {
    /// Remaining points `X_j`, sorted.
    pub members: Vec<VertexId>,
    /// Points settled in this round.
    pub padded: Vec<VertexId>,
    pub hst: Hst,
    /// HST leaf of each member.
    leaf: Vec<u32>,
    /// Contracted tree in member indices.
    pub tree: ContractedTree,
    /// Largest `ρ_j(x,y) / d(x,y)` over `x ∈ X_j` and settled `y`.
    pub ratio: f64,
}

impl MnLevel {
    fn index(&self, v: VertexId) -> Option<usize> {
        self.members.binary_search(&v).ok()
    }

    /// Ultrametric distance between two members.
    pub fn rho(&self, u: VertexId, v: VertexId) -> f64 {
        if u == v {
            return 0.0;
        }
        let (a, b) = (self.index(u).expect("member"), self.index(v).expect("member"));
        self.hst.lca_label(self.leaf[a], self.leaf[b])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MnHierarchy {
    pub k: u32,
    /// Padding radius as a fraction of the partition scale.
    pub gamma: f64,
    pub levels: Vec<MnLevel>,
    level_of: Vec<u32>,
}

/// One ultrametric tree over `xs` from CKR partitions at halving scales, the
/// set of points padded at every split, and the pairwise tree distances.
fn ramsey_round(m: &MetricGraph, xs: &[VertexId], gamma: f64, seed: u64) -> (Hst, Vec<u32>, Vec<bool>, Vec<f64>) {
    let n = xs.len();
    let d = |a: usize, b: usize| m.d(xs[a], xs[b]);
    let mut hst = Hst { parent: Vec::new(), label: Vec::new(), point: Vec::new() };
    let mut leaf = vec![NONE; n];
    let mut padded = vec![true; n];
    let mut rho = vec![0.0; n * n];
    let diam = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| d(a, b)).fold(0.0, f64::max);

    let mut r = rng(seed, 0);
    // Per-scale radius factor and center ranking, drawn lazily.
    let mut scales: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut stack: Vec<(Vec<usize>, usize, u32)> = vec![((0..n).collect(), 0, NONE)];
    while let Some((cluster, mut t, parent)) = stack.pop() {
        let node = hst.parent.len() as u32;
        hst.parent.push(parent);
        if cluster.len() == 1 {
            hst.label.push(0.0);
            hst.point.push(xs[cluster[0]]);
            leaf[cluster[0]] = node;
            continue;
        }
        hst.point.push(NONE);
        let groups = loop {
            while scales.len() <= t {
                let mut rank: Vec<usize> = (0..n).collect();
                rank.shuffle(&mut r);
                scales.push((r.gen_range(0.125..=0.25), rank));
            }
            let delta = diam / f64::powi(2.0, t as i32);
            let (beta, rank) = &scales[t];
            let mut centers = cluster.clone();
            centers.sort_unstable_by_key(|&c| rank[c]);
            let mut owner = vec![usize::MAX; cluster.len()];
            for (i, &x) in cluster.iter().enumerate() {
                owner[i] = centers.iter().position(|&c| d(x, c) <= beta * delta).expect("x covers itself");
            }
            let mut ids: Vec<usize> = owner.clone();
            ids.sort_unstable();
            ids.dedup();
            if ids.len() > 1 {
                let groups: Vec<Vec<usize>> = ids
                    .iter()
                    .map(|&c| cluster.iter().zip(&owner).filter(|(_, &o)| o == c).map(|(&x, _)| x).collect())
                    .collect();
                hst.label.push(delta);
                for (i, &x) in cluster.iter().enumerate() {
                    for (j, &y) in cluster.iter().enumerate() {
                        if owner[i] != owner[j] {
                            rho[x * n + y] = delta;
                            if d(x, y) <= gamma * delta {
                                padded[x] = false;
                            }
                        }
                    }
                }
                break groups;
            }
            t += 1;
        };
        for gp in groups.into_iter().rev() {
            stack.push((gp, t + 1, node));
        }
    }
    (hst, leaf, padded, rho)
}

/// Builds rounds until every point is settled. Each round is checked exactly:
/// `d <= ρ_j` on all pairs of `X_j` and `ρ_j <= d/γ` whenever one side is settled.
pub fn build_mn_hierarchy(m: &MetricGraph, k: u32, seed: u64) -> Result<MnHierarchy, EmulatorError> {
    if k == 0 {
        return Err(EmulatorError::InvalidParams("k must be positive".into()));
    }
    let gamma = 1.0 / (16.0 * k as f64);
    let mut level_of = vec![NONE; m.len()];
    let mut rest: Vec<VertexId> = (0..m.len() as VertexId).collect();
    let mut levels = Vec::new();
    while !rest.is_empty() {
        let j = levels.len() as u64;
        let mut found = None;
        for attempt in 0..MAX_ATTEMPTS {
            let (hst, leaf, pad, rho) = ramsey_round(m, &rest, gamma, crate::util::derive_seed(seed, j << 8 | attempt));
            if !pad.iter().any(|&p| p) {
                continue;
            }
            if let Some(ratio) = check_round(m, &rest, &pad, &rho, gamma) {
                found = Some((hst, leaf, pad, ratio));
                break;
            }
        }
        let (hst, leaf, pad, ratio) = found.ok_or(EmulatorError::RetryExhausted(j as usize))?;
        let tree = gupta_contract(&hst_edge_weights(&hst)?, &leaf)?;
        let padded: Vec<VertexId> = rest.iter().zip(&pad).filter(|(_, &p)| p).map(|(&x, _)| x).collect();
        for &y in &padded {
            level_of[y as usize] = j as u32;
        }
        let members = std::mem::take(&mut rest);
        rest = members.iter().zip(&pad).filter(|(_, &p)| !p).map(|(&x, _)| x).collect();
        levels.push(MnLevel { members, padded, hst, leaf, tree, ratio });
    }
    Ok(MnHierarchy { k, gamma, levels, level_of })
}

fn check_round(m: &MetricGraph, xs: &[VertexId], pad: &[bool], rho: &[f64], gamma: f64) -> Option<f64> {
    let n = xs.len();
    let mut ratio: f64 = 1.0;
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let (d, r) = (m.d(xs[a], xs[b]), rho[a * n + b]);
            if !le_tol(d, r) {
                return None;
            }
            if pad[b] {
                if !le_tol(r, d / gamma) {
                    return None;
                }
                ratio = ratio.max(r / d);
            }
        }
    }
    Some(ratio)
}

impl MnHierarchy {
    pub fn points(&self) -> usize {
        self.level_of.len()
    }

    /// Round in which `v` was settled.
    pub fn level_of(&self, v: VertexId) -> usize {
        self.level_of[v as usize] as usize
    }

    /// `Σ_j |X_j|`.
    pub fn total_members(&self) -> usize {
        self.levels.iter().map(|l| l.members.len()).sum()
    }

    /// Largest `ρ/d` over every pair the estimate is ever asked about.
    pub fn estimate_ratio(&self) -> f64 {
        self.levels.iter().map(|l| l.ratio).fold(1.0, f64::max)
    }

    /// `ρ_j(u,v)` for `j = min(j(u), j(v))`, within `[d, estimate_ratio()·d]`.
    pub fn estimate(&self, u: VertexId, v: VertexId) -> f64 {
        let j = self.level_of(u).min(self.level_of(v));
        self.levels[j].rho(u, v)
    }

    /// Levels, leaf pointers and two words per HST node.
    pub fn size_words(&self) -> usize {
        self.points() + self.levels.iter().map(|l| 2 * l.hst.len() + l.members.len()).sum::<usize>()
    }
}

/// Emulator whose edges are the contracted trees of every round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MnEmulator {
    pub hier: MnHierarchy,
    edges: Vec<(VertexId, VertexId, f64)>,
    /// Per level, edge index of each member's parent edge.
    parent_edge: Vec<Vec<u32>>,
    stretch: f64,
}

pub fn build_mn_emulator(m: &MetricGraph, k: u32, seed: u64) -> Result<MnEmulator, EmulatorError> {
    let hier = build_mn_hierarchy(m, k, seed)?;
    Ok(MnEmulator::from_hierarchy(hier))
}

impl MnEmulator {
    pub fn from_hierarchy(hier: MnHierarchy) -> Self {
        let mut edges = Vec::new();
        let mut parent_edge = Vec::new();
        let mut stretch: f64 = 1.0;
        for l in &hier.levels {
            // Terminal indices follow sorted HST node ids; map them to members.
            let mut pe = vec![NONE; l.members.len()];
            let point_of = |ti: u32| l.hst.point[l.tree.terminals[ti as usize] as usize];
            for (c, p, w) in l.tree.edges() {
                let (x, y) = (point_of(c), point_of(p));
                pe[l.index(x).unwrap()] = edges.len() as u32;
                edges.push((x, y, w));
            }
            parent_edge.push(pe);
            stretch = stretch.max(l.ratio * l.tree.distortion);
        }
        MnEmulator { hier, edges, parent_edge, stretch }
    }

    pub fn edges(&self) -> &[(VertexId, VertexId, f64)] {
        &self.edges
    }
}

impl InteractiveEmulator for MnEmulator {
    fn points(&self) -> usize {
        self.hier.points()
    }

    fn query(&self, u: VertexId, v: VertexId) -> Result<PathResult, QueryError> {
        check_point(self.points(), u)?;
        check_point(self.points(), v)?;
        let j = self.hier.level_of(u).min(self.hier.level_of(v));
        let l = &self.hier.levels[j];
        let pe = &self.parent_edge[j];
        let depth = |x: VertexId| {
            let t = l.tree.terminals.binary_search(&l.leaf[l.index(x).unwrap()]).unwrap();
            l.tree.depth[t]
        };
        let parent = |x: VertexId| {
            let e = pe[l.index(x).unwrap()];
            (e != NONE).then(|| {
                let (_, y, w) = self.edges[e as usize];
                (y, e, w)
            })
        };
        forest_path(u, v, parent, depth).ok_or(QueryError::Unreachable(u, v))
    }

    fn edge(&self, i: u32) -> (VertexId, VertexId, f64) {
        self.edges[i as usize]
    }

    fn used_edges(&self) -> Vec<u32> {
        (0..self.edges.len() as u32).collect()
    }

    /// Certified per round as tree-estimate ratio times contraction distortion.
    fn declared_stretch(&self) -> f64 {
        self.stretch
    }

    /// Hierarchy plus a parent pointer, edge and depth per tree member and
    /// three words per edge.
    fn size_words(&self) -> usize {
        self.hier.size_words() + self.parent_edge.iter().map(|p| 3 * p.len()).sum::<usize>() + 3 * self.edges.len()
    }
}
