use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EdgeId, VertexId, WeightedGraph};
use crate::util::approx_eq;

/// One step of a reported path: a graph edge or an entry of a virtual edge table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PathEdge {
    Real(EdgeId),
    Virtual(u32),
}

/// A walk `vertices[0] .. vertices[last]` with the edge used for each step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<PathEdge>,
    pub weight: f64,
}

impl PathResult {
    pub fn trivial(v: VertexId) -> Self {
        PathResult { vertices: vec![v], edges: Vec::new(), weight: 0.0 }
    }

    pub fn source(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn target(&self) -> VertexId {
        *self.vertices.last().unwrap()
    }

    pub fn hops(&self) -> usize {
        self.edges.len()
    }

    pub fn push(&mut self, e: PathEdge, to: VertexId, w: f64) {
        self.edges.push(e);
        self.vertices.push(to);
        self.weight += w;
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let mut edges = self.edges.clone();
        edges.reverse();
        PathResult { vertices, edges, weight: self.weight }
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn extend(&mut self, other: &PathResult) {
        assert_eq!(self.target(), other.source(), "concatenating disjoint paths");
        self.vertices.extend_from_slice(&other.vertices[1..]);
        self.edges.extend_from_slice(&other.edges);
        self.weight += other.weight;
    }

    /// Recomputes the weight as the sum of edge weights in path order.
    pub fn recompute_weight(&mut self, universe: &dyn EdgeUniverse) {
        self.weight = self
            .edges
            .iter()
            .map(|&e| universe.lookup(e).map(|(_, _, w)| w).unwrap_or(f64::NAN))
            .sum();
    }

    pub fn real_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().filter_map(|e| match e {
            PathEdge::Real(id) => Some(*id),
            PathEdge::Virtual(_) => None,
        })
    }
}

/// A set of edges a path may use, each resolved to its endpoints and weight.
pub trait EdgeUniverse {
    fn lookup(&self, e: PathEdge) -> Option<(VertexId, VertexId, f64)>;
}

/// Graph edges, optionally restricted to a subset of ids.
pub struct RealEdgeSet<'a> {
    g: &'a WeightedGraph,
    allowed: Option<Vec<bool>>,
}

impl<'a> RealEdgeSet<'a> {
    pub fn all(g: &'a WeightedGraph) -> Self {
        RealEdgeSet { g, allowed: None }
    }

    pub fn subset(g: &'a WeightedGraph, ids: impl IntoIterator<Item = EdgeId>) -> Self {
        let mut allowed = vec![false; g.m()];
        for id in ids {
            allowed[id as usize] = true;
        }
        RealEdgeSet { g, allowed: Some(allowed) }
    }
}

impl EdgeUniverse for RealEdgeSet<'_> {
    fn lookup(&self, e: PathEdge) -> Option<(VertexId, VertexId, f64)> {
        let PathEdge::Real(id) = e else { return None };
        if id as usize >= self.g.m() {
            return None;
        }
        if let Some(allowed) = &self.allowed {
            if !allowed[id as usize] {
                return None;
            }
        }
        let ed = self.g.edge(id);
        Some((ed.u, ed.v, ed.w))
    }
}

/// A table of virtual edges `(a, b, w)` addressed by index.
impl EdgeUniverse for [(VertexId, VertexId, f64)] {
    fn lookup(&self, e: PathEdge) -> Option<(VertexId, VertexId, f64)> {
        let PathEdge::Virtual(i) = e else { return None };
        self.get(i as usize).copied()
    }
}

impl EdgeUniverse for Vec<(VertexId, VertexId, f64)> {
    fn lookup(&self, e: PathEdge) -> Option<(VertexId, VertexId, f64)> {
        self.as_slice().lookup(e)
    }
}

/// Union of two universes: real edges from the first, virtual from the second.
pub struct Union<'a>(pub &'a dyn EdgeUniverse, pub &'a dyn EdgeUniverse);

impl EdgeUniverse for Union<'_> {
    fn lookup(&self, e: PathEdge) -> Option<(VertexId, VertexId, f64)> {
        self.0.lookup(e).or_else(|| self.1.lookup(e))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PathError {
    #[error("path has {vertices} vertices but {edges} edges")]
    Shape { vertices: usize, edges: usize },
    #[error("path runs {found_start}->{found_end}, expected {u}->{v}")]
    Endpoints { u: VertexId, v: VertexId, found_start: VertexId, found_end: VertexId },
    #[error("edge outside universe at step {step}: {edge:?}")]
    OutsideUniverse { step: usize, edge: PathEdge },
    #[error("broken adjacency at step {step}: edge {edge:?} does not join {a} and {b}")]
    BrokenAdjacency { step: usize, edge: PathEdge, a: VertexId, b: VertexId },
    #[error("declared weight {declared} differs from edge sum {actual}")]
    WeightMismatch { declared: f64, actual: f64 },
}

/// Checks that `p` is a `u`-`v` walk inside `universe` whose declared weight
/// matches its edge sum, and returns that weight.
pub fn validate_path(
    universe: &dyn EdgeUniverse,
    p: &PathResult,
    u: VertexId,
    v: VertexId,
) -> Result<f64, PathError> {
    if p.vertices.len() != p.edges.len() + 1 {
        return Err(PathError::Shape { vertices: p.vertices.len(), edges: p.edges.len() });
    }
    if p.source() != u || p.target() != v {
        return Err(PathError::Endpoints {
            u,
            v,
            found_start: p.source(),
            found_end: p.target(),
        });
    }
    let mut sum = 0.0;
    for (step, &e) in p.edges.iter().enumerate() {
        let (a, b) = (p.vertices[step], p.vertices[step + 1]);
        let Some((x, y, w)) = universe.lookup(e) else {
            return Err(PathError::OutsideUniverse { step, edge: e });
        };
        if !((x == a && y == b) || (x == b && y == a)) {
            return Err(PathError::BrokenAdjacency { step, edge: e, a, b });
        }
        sum += w;
    }
    if !approx_eq(sum, p.weight) {
        return Err(PathError::WeightMismatch { declared: p.weight, actual: sum });
    }
    Ok(p.weight)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 5.0)]).unwrap()
    }

    #[test]
    fn empty_path_validates() {
        let g = triangle();
        let p = PathResult::trivial(1);
        assert_eq!(validate_path(&RealEdgeSet::all(&g), &p, 1, 1), Ok(0.0));
    }

    #[test]
    fn rejects_edge_outside_universe() {
        let g = triangle();
        let p = PathResult { vertices: vec![0, 2], edges: vec![PathEdge::Real(2)], weight: 5.0 };
        let uni = RealEdgeSet::subset(&g, [0, 1]);
        assert!(matches!(
            validate_path(&uni, &p, 0, 2),
            Err(PathError::OutsideUniverse { step: 0, .. })
        ));
        assert_eq!(validate_path(&RealEdgeSet::all(&g), &p, 0, 2), Ok(5.0));
    }

    #[test]
    fn rejects_bad_adjacency_and_weight() {
        let g = triangle();
        let uni = RealEdgeSet::all(&g);
        let p = PathResult { vertices: vec![0, 2], edges: vec![PathEdge::Real(0)], weight: 1.0 };
        assert!(matches!(validate_path(&uni, &p, 0, 2), Err(PathError::BrokenAdjacency { .. })));
        let p = PathResult {
            vertices: vec![0, 1, 2],
            edges: vec![PathEdge::Real(0), PathEdge::Real(1)],
            weight: 3.5,
        };
        assert!(matches!(validate_path(&uni, &p, 0, 2), Err(PathError::WeightMismatch { .. })));
        let p = PathResult { weight: 3.0, ..p };
        assert_eq!(validate_path(&uni, &p, 0, 2), Ok(3.0));
        assert!(matches!(validate_path(&uni, &p, 2, 0), Err(PathError::Endpoints { .. })));
    }

    #[test]
    fn virtual_table_and_union() {
        let g = triangle();
        let table = vec![(0u32, 2u32, 3.0)];
        let real = RealEdgeSet::all(&g);
        let uni = Union(&real, &table);
        let p = PathResult {
            vertices: vec![1, 0, 2],
            edges: vec![PathEdge::Real(0), PathEdge::Virtual(0)],
            weight: 4.0,
        };
        assert_eq!(validate_path(&uni, &p, 1, 2), Ok(4.0));
        assert!(validate_path(&real, &p, 1, 2).is_err());
    }

    #[test]
    fn reverse_and_extend() {
        let mut a = PathResult::trivial(0);
        a.push(PathEdge::Real(0), 1, 1.0);
        let mut b = PathResult::trivial(1);
        b.push(PathEdge::Real(1), 2, 2.0);
        a.extend(&b);
        assert_eq!(a.vertices, vec![0, 1, 2]);
        let r = a.reversed();
        assert_eq!(r.vertices, vec![2, 1, 0]);
        assert_eq!(r.edges, vec![PathEdge::Real(1), PathEdge::Real(0)]);
        assert_eq!(r.weight, 3.0);
    }
}
