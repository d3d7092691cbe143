#![allow(dead_code)]

use ocm_core::{Graph, Rational};
use proptest::prelude::*;

pub fn r(v: i64) -> Rational {
    Rational::from_integer(v as i128)
}

/// Any digraph with up to `max_n` vertices, integer weights in `[-9, 9]`.
pub fn arb_graph(max_n: usize, max_m: usize) -> impl Strategy<Value = Graph<Rational>> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec((0..n, 0..n, -9i64..=9), 0..=max_m)
            .prop_map(move |edges| build(n, edges.into_iter().collect()))
    })
}

/// Strongly connected digraph: a ring through a shuffled vertex order plus
/// extra random edges.
pub fn arb_strongly_connected(
    max_n: usize,
    max_extra: usize,
) -> impl Strategy<Value = Graph<Rational>> {
    (1..=max_n).prop_flat_map(move |n| {
        (
            Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            prop::collection::vec(-9i64..=9, n),
            prop::collection::vec((0..n, 0..n, -9i64..=9), 0..=max_extra),
        )
            .prop_map(move |(order, ring_w, extra)| {
                let mut edges: Vec<(usize, usize, i64)> = (0..n)
                    .map(|i| (order[i], order[(i + 1) % n], ring_w[i]))
                    .collect();
                edges.extend(extra);
                build(n, edges)
            })
    })
}

pub fn build(n: usize, edges: Vec<(usize, usize, i64)>) -> Graph<Rational> {
    let edges: Vec<_> = edges.into_iter().map(|(u, v, w)| (u, v, r(w))).collect();
    Graph::from_edges(n, &edges).expect("generated endpoints are in range")
}
