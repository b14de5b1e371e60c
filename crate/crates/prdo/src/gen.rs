//! Seeded graph generators. Weights are integers stored as floats, which keeps
//! path sums exact.

use std::ops::Range;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{VertexId, WeightedGraph};
use crate::util::rng;

/// G(n, p) with uniform integer weights in `weights`. With `connected`, a
/// random spanning tree is added first.
pub fn erdos_renyi(n: usize, p: f64, weights: Range<u32>, connected: bool, seed: u64) -> WeightedGraph {
    let mut r = rng(seed, 0x4552);
    let mut edges = Vec::new();
    if connected && n > 1 {
        let mut order: Vec<VertexId> = (0..n as VertexId).collect();
        order.shuffle(&mut r);
        for i in 1..n {
            let j = r.gen_range(0..i);
            edges.push((order[i], order[j], r.gen_range(weights.clone()) as f64));
        }
    }
    for u in 0..n as VertexId {
        for v in u + 1..n as VertexId {
            if r.gen_bool(p.clamp(0.0, 1.0)) {
                edges.push((u, v, r.gen_range(weights.clone()) as f64));
            }
        }
    }
    WeightedGraph::new(n, edges).expect("generated edges are valid")
}

pub fn path_graph(n: usize, w: f64) -> WeightedGraph {
    WeightedGraph::new(n, (1..n as VertexId).map(|v| (v - 1, v, w))).expect("valid path")
}

/// `rows × cols` grid with random integer weights.
pub fn grid(rows: usize, cols: usize, weights: Range<u32>, seed: u64) -> WeightedGraph {
    let mut r = rng(seed, 0x4752);
    let id = |i: usize, j: usize| (i * cols + j) as VertexId;
    let mut edges = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if j + 1 < cols {
                edges.push((id(i, j), id(i, j + 1), r.gen_range(weights.clone()) as f64));
            }
            if i + 1 < rows {
                edges.push((id(i, j), id(i + 1, j), r.gen_range(weights.clone()) as f64));
            }
        }
    }
    WeightedGraph::new(rows * cols, edges).expect("valid grid")
}

/// Points uniform in the unit square joined when closer than `radius`;
/// weights are Euclidean lengths scaled by 1000 and rounded up.
pub fn random_geometric(n: usize, radius: f64, seed: u64) -> WeightedGraph {
    let mut r = rng(seed, 0x5247);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (r.gen::<f64>(), r.gen::<f64>())).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let d = ((pts[u].0 - pts[v].0).powi(2) + (pts[u].1 - pts[v].1).powi(2)).sqrt();
            if d < radius {
                edges.push((u as VertexId, v as VertexId, (d * 1000.0).ceil().max(1.0)));
            }
        }
    }
    WeightedGraph::new(n, edges).expect("valid geometric graph")
}

/// A named generator with its parameters, reproducible from the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GraphSpec {
    ErdosRenyi { n: usize, p: f64, max_w: u32, connected: bool },
    Grid { rows: usize, cols: usize, max_w: u32 },
    Path { n: usize },
    RandomGeometric { n: usize, radius: f64 },
}

impl GraphSpec {
    pub fn generate(&self, seed: u64) -> WeightedGraph {
        match *self {
            GraphSpec::ErdosRenyi { n, p, max_w, connected } => {
                erdos_renyi(n, p, 1..max_w.max(1) + 1, connected, seed)
            }
            GraphSpec::Grid { rows, cols, max_w } => grid(rows, cols, 1..max_w.max(1) + 1, seed),
            GraphSpec::Path { n } => path_graph(n, 1.0),
            GraphSpec::RandomGeometric { n, radius } => random_geometric(n, radius, seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seed_deterministic() {
        assert_eq!(erdos_renyi(50, 0.1, 1..10, true, 3), erdos_renyi(50, 0.1, 1..10, true, 3));
        assert_ne!(erdos_renyi(50, 0.1, 1..10, true, 3), erdos_renyi(50, 0.1, 1..10, true, 4));
        assert_eq!(random_geometric(40, 0.3, 1), random_geometric(40, 0.3, 1));
        assert_eq!(grid(4, 5, 1..9, 2), grid(4, 5, 1..9, 2));
    }

    #[test]
    fn connected_option_connects() {
        for s in 0..10 {
            assert!(erdos_renyi(60, 0.0, 1..5, true, s).is_connected());
        }
        assert!(!erdos_renyi(60, 0.0, 1..5, false, 0).is_connected());
    }

    #[test]
    fn shapes() {
        let g = grid(3, 4, 1..2, 0);
        assert_eq!((g.n(), g.m()), (12, 17));
        let p = path_graph(5, 2.0);
        assert_eq!(p.m(), 4);
        assert!(GraphSpec::Path { n: 7 }.generate(0).is_connected());
    }
}
