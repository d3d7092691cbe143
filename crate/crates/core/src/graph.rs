//! Immutable weighted digraph in compressed sparse row form.
//!
//! Forward adjacency lives in `fwd_index`/`fwd_target`/`fwd_weight`; the
//! backward adjacency is stored explicitly (`bwd_index`/`bwd_source`) with
//! `bwd_fwd_edge` mapping every backward slot to the forward edge it mirrors.
//! An edge is identified by its position in the forward arrays.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Vertex = usize;
pub type EdgeId = usize;

/// Marker for "no vertex" / "no edge".
pub const NIL: usize = usize::MAX;

/// Optimization direction. The solvers only minimize; maximization is
/// handled by negating the weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    #[default]
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph<W> {
    n: usize,
    fwd_index: Vec<usize>,
    fwd_target: Vec<Vertex>,
    fwd_weight: Vec<W>,
    fwd_source: Vec<Vertex>,
    bwd_index: Vec<usize>,
    bwd_source: Vec<Vertex>,
    bwd_fwd_edge: Vec<EdgeId>,
}

impl<W: Scalar> Graph<W> {
    /// Builds the CSR form of `edges` over vertices `0..n`.
    ///
    /// Edges keep their input order within each source's list, so edge ids
    /// (and every tie-break that depends on them) follow the input order.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex, W)]) -> Result<Self> {
        for (i, &(u, v, _)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!(
                    "edge {i} ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
        }
        let m = edges.len();
        let mut fwd_index = vec![0usize; n + 1];
        for &(u, _, _) in edges {
            fwd_index[u + 1] += 1;
        }
        for v in 0..n {
            fwd_index[v + 1] += fwd_index[v];
        }
        let mut cursor = fwd_index.clone();
        let mut fwd_target = vec![0; m];
        let mut fwd_source = vec![0; m];
        let mut fwd_weight = vec![W::zero(); m];
        for &(u, v, w) in edges {
            let slot = cursor[u];
            cursor[u] += 1;
            fwd_target[slot] = v;
            fwd_source[slot] = u;
            fwd_weight[slot] = w;
        }
        Ok(Self::with_forward(
            n, fwd_index, fwd_target, fwd_source, fwd_weight,
        ))
    }

    fn with_forward(
        n: usize,
        fwd_index: Vec<usize>,
        fwd_target: Vec<Vertex>,
        fwd_source: Vec<Vertex>,
        fwd_weight: Vec<W>,
    ) -> Self {
        let m = fwd_target.len();
        let mut bwd_index = vec![0usize; n + 1];
        for &v in &fwd_target {
            bwd_index[v + 1] += 1;
        }
        for v in 0..n {
            bwd_index[v + 1] += bwd_index[v];
        }
        let mut cursor = bwd_index.clone();
        let mut bwd_source = vec![0; m];
        let mut bwd_fwd_edge = vec![0; m];
        // Ascending edge ids, so each backward list is ordered by forward id.
        for e in 0..m {
            let v = fwd_target[e];
            let slot = cursor[v];
            cursor[v] += 1;
            bwd_source[slot] = fwd_source[e];
            bwd_fwd_edge[slot] = e;
        }
        Graph {
            n,
            fwd_index,
            fwd_target,
            fwd_weight,
            fwd_source,
            bwd_index,
            bwd_source,
            bwd_fwd_edge,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.fwd_target.len()
    }

    pub fn fwd_index(&self) -> &[usize] {
        &self.fwd_index
    }

    pub fn fwd_target(&self) -> &[Vertex] {
        &self.fwd_target
    }

    pub fn fwd_weight(&self) -> &[W] {
        &self.fwd_weight
    }

    pub fn bwd_index(&self) -> &[usize] {
        &self.bwd_index
    }

    pub fn bwd_source(&self) -> &[Vertex] {
        &self.bwd_source
    }

    pub fn bwd_fwd_edge(&self) -> &[EdgeId] {
        &self.bwd_fwd_edge
    }

    /// Forward edge ids leaving `v`, ascending.
    #[inline]
    pub fn out_edges(&self, v: Vertex) -> Range<EdgeId> {
        self.fwd_index[v]..self.fwd_index[v + 1]
    }

    /// Backward slots of `v`; map through [`Graph::bwd_fwd_edge`] for edge ids.
    #[inline]
    pub fn in_slots(&self, v: Vertex) -> Range<usize> {
        self.bwd_index[v]..self.bwd_index[v + 1]
    }

    #[inline]
    pub fn source(&self, e: EdgeId) -> Vertex {
        self.fwd_source[e]
    }

    #[inline]
    pub fn target(&self, e: EdgeId) -> Vertex {
        self.fwd_target[e]
    }

    #[inline]
    pub fn weight(&self, e: EdgeId) -> W {
        self.fwd_weight[e]
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.fwd_index[v + 1] - self.fwd_index[v]
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.bwd_index[v + 1] - self.bwd_index[v]
    }

    /// `(source, target, weight)` triples in edge-id order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex, W)> + '_ {
        (0..self.edge_count())
            .map(move |e| (self.fwd_source[e], self.fwd_target[e], self.fwd_weight[e]))
    }

    pub fn has_self_loop(&self, v: Vertex) -> bool {
        self.out_edges(v).any(|e| self.fwd_target[e] == v)
    }

    /// Largest absolute edge weight, zero for an edgeless graph.
    pub fn max_abs_weight(&self) -> W {
        self.fwd_weight
            .iter()
            .map(|w| w.abs())
            .fold(W::zero(), |acc, w| if w > acc { w } else { acc })
    }

    pub fn min_weight(&self) -> Option<W> {
        self.fwd_weight
            .iter()
            .copied()
            .reduce(|a, b| if b < a { b } else { a })
    }

    pub fn max_weight(&self) -> Option<W> {
        self.fwd_weight
            .iter()
            .copied()
            .reduce(|a, b| if b > a { b } else { a })
    }

    /// Same structure with every weight replaced by `f(weight)`.
    pub fn map_weights<V: Scalar>(&self, f: impl Fn(W) -> V) -> Graph<V> {
        Graph {
            n: self.n,
            fwd_index: self.fwd_index.clone(),
            fwd_target: self.fwd_target.clone(),
            fwd_weight: self.fwd_weight.iter().map(|&w| f(w)).collect(),
            fwd_source: self.fwd_source.clone(),
            bwd_index: self.bwd_index.clone(),
            bwd_source: self.bwd_source.clone(),
            bwd_fwd_edge: self.bwd_fwd_edge.clone(),
        }
    }

    /// Weight negation: the maximum cycle mean of `g` is minus the minimum
    /// cycle mean of `g.negate_weights()`.
    pub fn negate_weights(&self) -> Self {
        self.map_weights(|w| -w)
    }

    /// Adds a root vertex `n` with a zero-weight edge to every vertex.
    ///
    /// The root has no incoming edges, so the cycle set is unchanged.
    pub fn augment_root(&self) -> Self {
        let n = self.n;
        let mut edges: Vec<(Vertex, Vertex, W)> = self.edges().collect();
        edges.extend((0..n).map(|v| (n, v, W::zero())));
        Self::from_edges(n + 1, &edges).expect("root augmentation keeps endpoints in range")
    }

    /// Default weight for the edges added by [`Graph::augment_hamiltonian`]:
    /// `2n(max|w| + 1) + 1`.
    pub fn default_hamiltonian_weight(&self) -> W {
        let n = W::from_count(self.n.max(1));
        W::from_int(2) * n * (self.max_abs_weight() + W::one()) + W::one()
    }

    /// Adds the cycle `0 -> 1 -> ... -> n-1 -> 0` with weight `big_w` on
    /// every added edge (the default weight when `None`).
    ///
    /// Each added edge is appended after the original out-edges of its source.
    /// With the default weight every cycle through an added edge has mean
    /// above `max|w|`, so the minimum cycle mean is preserved whenever the
    /// original graph has a cycle; see [`Graph::is_hamiltonian_sentinel`].
    pub fn augment_hamiltonian(&self, big_w: Option<W>) -> Self {
        let n = self.n;
        let big_w = big_w.unwrap_or_else(|| self.default_hamiltonian_weight());
        let mut edges = Vec::with_capacity(self.edge_count() + n);
        for v in 0..n {
            edges.extend(
                self.out_edges(v)
                    .map(|e| (v, self.fwd_target[e], self.fwd_weight[e])),
            );
            edges.push((v, (v + 1) % n, big_w));
        }
        Self::from_edges(n, &edges).expect("hamiltonian augmentation keeps endpoints in range")
    }

    /// Whether a minimum cycle mean computed on `self.augment_hamiltonian(None)`
    /// only exists because of the added edges (the original graph is acyclic).
    pub fn is_hamiltonian_sentinel(&self, augmented_mean: W) -> bool {
        augmented_mean > self.max_abs_weight()
    }

    /// Subgraph induced by `vertices` (renumbered in the given order), plus
    /// the original edge id of every kept edge.
    pub fn induced_subgraph(&self, vertices: &[Vertex]) -> (Self, Vec<EdgeId>) {
        let mut local = vec![NIL; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut edges = Vec::new();
        let mut origin = Vec::new();
        for &v in vertices {
            for e in self.out_edges(v) {
                let t = self.fwd_target[e];
                if local[t] != NIL {
                    edges.push((local[v], local[t], self.fwd_weight[e]));
                    origin.push(e);
                }
            }
        }
        let sub =
            Self::from_edges(vertices.len(), &edges).expect("induced subgraph endpoints in range");
        (sub, origin)
    }
}
