//! The role shared by every structure that answers `(u, v)` with a path.

use thiserror::Error;

use crate::graph::{EdgeId, PathResult, VertexId, WeightedGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("pair ({0},{1}) is outside the demand set")]
    NotInDemand(VertexId, VertexId),
    #[error("{0} and {1} lie in different components")]
    Unreachable(VertexId, VertexId),
    #[error("vertex {0} is outside the structure")]
    OutOfRange(VertexId),
}

/// An oracle whose answers are paths in the graph it was built on.
pub trait InteractiveOracle {
    fn query(&self, g: &WeightedGraph, u: VertexId, v: VertexId) -> Result<PathResult, QueryError>;

    /// Upper bound on answer weight over true distance.
    fn declared_stretch(&self) -> f64;

    /// Storage in words: one per stored id, next hop, flag or weight.
    fn size_words(&self) -> usize;

    /// Sorted ids of every graph edge an answer may use.
    fn edge_set(&self) -> Vec<EdgeId>;
}

pub(crate) fn check_vertex(g: &WeightedGraph, v: VertexId) -> Result<(), QueryError> {
    if (v as usize) < g.n() {
        Ok(())
    } else {
        Err(QueryError::OutOfRange(v))
    }
}

pub(crate) fn normalize(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    (u.min(v), u.max(v))
}
