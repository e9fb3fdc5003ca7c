//! Relation graph and its minimum spanning tree.

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use super::reduce::ContractionVectors;
use super::relation::{weight, RelationScalar};
use crate::par::{self, ExecPolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub weight: usize,
    /// Vertex numbers (positions in [`ContractionVectors::vectors`]), `a < b`.
    pub a: usize,
    pub b: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpanningTree {
    pub vertices: usize,
    pub edges: Vec<Edge>,
}

impl SpanningTree {
    pub fn weight(&self) -> usize {
        self.edges.iter().map(|e| e.weight).sum()
    }
}

/// All-pairs edge weights, sorted by `(weight, a, b)`.
fn all_edges<T: RelationScalar + Sync>(vectors: &[Vec<T>], policy: ExecPolicy) -> Vec<Edge> {
    let n = vectors.len();
    let rows = par::map_range(policy, n, |a| {
        (a + 1..n)
            .map(|b| Edge {
                weight: weight(&vectors[a], &vectors[b]),
                a,
                b,
            })
            .collect::<Vec<_>>()
    });
    let mut edges: Vec<Edge> = rows.concat();
    par::sort_unstable_by_key(policy, &mut edges, |e| (e.weight, e.a, e.b));
    edges
}

fn kruskal(n: usize, edges: &[Edge]) -> SpanningTree {
    let mut uf = UnionFind::<usize>::new(n);
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    for e in edges {
        if tree.len() + 1 >= n {
            break;
        }
        if uf.union(e.a, e.b) {
            tree.push(*e);
        }
    }
    SpanningTree { vertices: n, edges: tree }
}

/// Kruskal's algorithm on the complete relation graph. Relations are
/// detected in exact arithmetic when the vectors carry rational entries.
pub fn minimum_spanning_tree(vectors: &ContractionVectors, policy: ExecPolicy) -> SpanningTree {
    let edges = match &vectors.exact {
        Some(q) => all_edges(q, policy),
        None => all_edges(&vectors.vectors, policy),
    };
    kruskal(vectors.len(), &edges)
}
