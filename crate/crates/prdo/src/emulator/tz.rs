use serde::{Deserialize, Serialize};

use super::{as_virtual, check_point, InteractiveEmulator, MetricGraph};
use crate::graph::{PathResult, VertexId, WeightedGraph};
use crate::oracle::QueryError;
use crate::partial_tz::{build_complete_tz, PartialAnswer, PartialTz};

/// Complete distance oracle run on the metric's complete graph; its pivot
/// and cluster-tree edges form the emulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TzEmulator {
    pub k: u32,
    graph: WeightedGraph,
    oracle: PartialTz,
    used: Vec<u32>,
}

pub fn build_tz_emulator(m: &MetricGraph, k: u32, seed: u64) -> TzEmulator {
    let graph = m.complete_graph();
    let oracle = build_complete_tz(&graph, k, seed);
    let used = oracle.edge_set();
    TzEmulator { k: k.max(1), graph, oracle, used }
}

impl TzEmulator {
    /// Rebuilds adjacency after deserialization.
    pub fn restore(&mut self) {
        self.graph.rebuild_adjacency();
    }

    /// Answer plus the number of bunch-membership tests spent.
    pub fn query_counted(&self, u: VertexId, v: VertexId) -> (Result<PathResult, QueryError>, usize) {
        if let Err(e) = check_point(self.points(), u).and(check_point(self.points(), v)) {
            return (Err(e), 0);
        }
        match self.oracle.partial_query_counted(&self.graph, u, v) {
            (PartialAnswer::Direct(p), evals) => (Ok(as_virtual(p)), evals),
            (PartialAnswer::Escape { .. }, evals) => (Err(QueryError::Unreachable(u, v)), evals),
        }
    }
}

impl InteractiveEmulator for TzEmulator {
    fn points(&self) -> usize {
        self.graph.n()
    }

    fn query(&self, u: VertexId, v: VertexId) -> Result<PathResult, QueryError> {
        self.query_counted(u, v).0
    }

    fn edge(&self, i: u32) -> (VertexId, VertexId, f64) {
        let e = self.graph.edge(i);
        (e.u, e.v, e.w)
    }

    fn used_edges(&self) -> Vec<u32> {
        self.used.clone()
    }

    fn declared_stretch(&self) -> f64 {
        (2 * self.k - 1) as f64
    }

    fn size_words(&self) -> usize {
        self.oracle.size_words()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emulator::EmulatorEdges;
    use crate::gen::erdos_renyi;
    use crate::graph::validate_path;
    use crate::util::le_tol;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]

        #[test]
        fn tz_emulator_stretch(n in 10usize..60, k in 1u32..5, seed in any::<u64>()) {
            let g = erdos_renyi(n, 0.1, 1..30, true, seed);
            let m = MetricGraph::of_graph(&g);
            let em = build_tz_emulator(&m, k, seed);
            let edges = EmulatorEdges::new(&em);
            for u in 0..n as VertexId {
                for v in 0..n as VertexId {
                    let p = em.query(u, v).unwrap();
                    let w = validate_path(&edges, &p, u, v).unwrap();
                    let d = m.d(u, v);
                    prop_assert!(le_tol(d, w) && le_tol(w, em.declared_stretch() * d));
                }
            }
        }
    }
}
