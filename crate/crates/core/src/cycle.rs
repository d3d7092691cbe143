use std::cmp::Ordering;

use crate::graph::{EdgeId, Graph, Vertex};
use crate::scalar::Scalar;

/// Summary of a located cycle.
///
/// `anchor` is the smallest vertex id on the cycle; `mean == weight / length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleRecord<W> {
    pub anchor: Vertex,
    pub length: usize,
    pub weight: W,
    pub mean: W,
}

impl<W: Scalar> CycleRecord<W> {
    pub fn new(anchor: Vertex, length: usize, weight: W) -> Self {
        CycleRecord {
            anchor,
            length,
            weight,
            mean: W::mean_of(weight, length),
        }
    }

    /// Lexicographic `(mean, anchor)` order used by every minimum selection.
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        self.mean
            .total_cmp(&other.mean)
            .then(self.anchor.cmp(&other.anchor))
    }
}

/// Smallest record by `(mean, anchor)`; `None` on empty input.
pub fn select_min_cycle<'a, W: Scalar>(
    cycles: impl IntoIterator<Item = &'a CycleRecord<W>>,
) -> Option<CycleRecord<W>> {
    cycles.into_iter().copied().min_by(|a, b| a.cmp_key(b))
}

/// A cycle given as its edge sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Cycle<W> {
    pub edges: Vec<EdgeId>,
    pub record: CycleRecord<W>,
}

impl<W: Scalar> Cycle<W> {
    /// Builds the cycle from consecutive edges; the caller guarantees closure.
    pub fn from_edges(g: &Graph<W>, edges: Vec<EdgeId>) -> Self {
        let weight = edges.iter().fold(W::zero(), |acc, &e| acc + g.weight(e));
        let anchor = edges.iter().map(|&e| g.source(e)).min().unwrap_or(0);
        let record = CycleRecord::new(anchor, edges.len(), weight);
        Cycle { edges, record }
    }

    pub fn vertices(&self, g: &Graph<W>) -> Vec<Vertex> {
        self.edges.iter().map(|&e| g.source(e)).collect()
    }

    /// Rotates the edge sequence so that it starts at the anchor.
    pub fn rotate_to_anchor(&mut self, g: &Graph<W>) {
        if let Some(pos) = self
            .edges
            .iter()
            .position(|&e| g.source(e) == self.record.anchor)
        {
            self.edges.rotate_left(pos);
        }
    }

    /// Checks that consecutive edges chain and the sequence closes.
    pub fn is_valid_in(&self, g: &Graph<W>) -> bool {
        if self.edges.is_empty() {
            return false;
        }
        let k = self.edges.len();
        (0..k).all(|i| {
            let e = self.edges[i];
            e < g.edge_count() && g.target(e) == g.source(self.edges[(i + 1) % k])
        })
    }

    /// Cycle weight under `w - lambda`.
    pub fn reduced_weight(&self, lambda: W) -> W {
        self.record.weight - lambda * W::from_count(self.record.length)
    }
}
