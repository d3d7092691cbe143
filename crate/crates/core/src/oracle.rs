//! Independent ground truth for small graphs.
//!
//! Two oracles of unrelated design: exhaustive simple-cycle enumeration and
//! Karp's walk-length dynamic program. Neither shares code with the solvers.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Vertex};
use crate::scalar::Scalar;

/// Largest graph accepted by [`enumerate_cycle_means`].
pub const ENUMERATION_VERTEX_CAP: usize = 14;
/// Largest graph accepted by [`dp_min_cycle_mean`].
pub const DP_VERTEX_CAP: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedCycle<W> {
    pub mean: W,
    /// Vertices in cycle order, starting at the smallest.
    pub vertices: Vec<Vertex>,
    pub edges: Vec<EdgeId>,
}

/// Every simple cycle exactly once (parallel edges give distinct cycles),
/// sorted by mean, then by vertex sequence.
pub fn enumerate_cycle_means<W: Scalar>(g: &Graph<W>) -> Result<Vec<EnumeratedCycle<W>>> {
    let n = g.vertex_count();
    if n > ENUMERATION_VERTEX_CAP {
        return Err(Error::InvalidInput(format!(
            "cycle enumeration is capped at {ENUMERATION_VERTEX_CAP} vertices, graph has {n}"
        )));
    }
    let mut out = Vec::new();
    let mut on_path = vec![false; n];
    let mut path_edges = Vec::new();
    for start in 0..n {
        on_path[start] = true;
        dfs(g, start, start, &mut on_path, &mut path_edges, &mut out);
        on_path[start] = false;
    }
    out.sort_by(|a: &EnumeratedCycle<W>, b| {
        a.mean
            .total_cmp(&b.mean)
            .then_with(|| a.vertices.cmp(&b.vertices))
    });
    Ok(out)
}

// Cycles are rooted at their smallest vertex: the DFS from `start` only
// enters vertices greater than `start`.
fn dfs<W: Scalar>(
    g: &Graph<W>,
    start: Vertex,
    v: Vertex,
    on_path: &mut [bool],
    path_edges: &mut Vec<EdgeId>,
    out: &mut Vec<EnumeratedCycle<W>>,
) {
    for e in g.out_edges(v) {
        let t = g.target(e);
        if t == start {
            path_edges.push(e);
            let weight = path_edges
                .iter()
                .fold(W::zero(), |acc, &x| acc + g.weight(x));
            out.push(EnumeratedCycle {
                mean: weight / W::from_count(path_edges.len()),
                vertices: path_edges.iter().map(|&x| g.source(x)).collect(),
                edges: path_edges.clone(),
            });
            path_edges.pop();
        } else if t > start && !on_path[t] {
            on_path[t] = true;
            path_edges.push(e);
            dfs(g, start, t, on_path, path_edges, out);
            path_edges.pop();
            on_path[t] = false;
        }
    }
}

/// Minimum cycle mean by enumeration; `None` for an acyclic graph.
pub fn enumerate_min_cycle_mean<W: Scalar>(g: &Graph<W>) -> Result<Option<W>> {
    Ok(enumerate_cycle_means(g)?.first().map(|c| c.mean))
}

/// Maximum cycle mean by enumeration; `None` for an acyclic graph.
pub fn enumerate_max_cycle_mean<W: Scalar>(g: &Graph<W>) -> Result<Option<W>> {
    Ok(enumerate_cycle_means(g)?.last().map(|c| c.mean))
}

fn min_opt<W: Scalar>(a: Option<W>, b: W) -> Option<W> {
    match a {
        Some(x) if x.total_cmp(&b) != Ordering::Greater => Some(x),
        _ => Some(b),
    }
}

/// Row `k + 1` of the walk table: `D[k+1][v] = min over (u, v) of D[k][u] + w(u, v)`.
fn next_row<W: Scalar>(g: &Graph<W>, row: &[Option<W>]) -> Vec<Option<W>> {
    (0..g.vertex_count())
        .map(|v| {
            g.in_slots(v).fold(None, |best, slot| {
                let u = g.bwd_source()[slot];
                match row[u] {
                    Some(du) => min_opt(best, du + g.weight(g.bwd_fwd_edge()[slot])),
                    None => best,
                }
            })
        })
        .collect()
}

/// Karp's minimum cycle mean: with `D[k][v]` the lightest walk of exactly
/// `k` edges ending at `v` (from any start),
/// `mu* = min_v max_{k < n} (D[n][v] - D[k][v]) / (n - k)`.
///
/// Returns `None` for an acyclic graph. Two sweeps keep memory at `O(n)`.
pub fn dp_min_cycle_mean<W: Scalar>(g: &Graph<W>) -> Result<Option<W>> {
    let n = g.vertex_count();
    if n > DP_VERTEX_CAP {
        return Err(Error::InvalidInput(format!(
            "dynamic-programming oracle is capped at {DP_VERTEX_CAP} vertices, graph has {n}"
        )));
    }
    if n == 0 {
        return Ok(None);
    }
    let first: Vec<Option<W>> = vec![Some(W::zero()); n];
    let mut row = first.clone();
    for _ in 0..n {
        row = next_row(g, &row);
    }
    let last = row;
    if last.iter().all(Option::is_none) {
        return Ok(None);
    }
    let mut worst: Vec<Option<W>> = vec![None; n];
    let mut row = first;
    for k in 0..n {
        for v in 0..n {
            if let (Some(dn), Some(dk)) = (last[v], row[v]) {
                let ratio = (dn - dk) / W::from_count(n - k);
                worst[v] = match worst[v] {
                    Some(x) if x.total_cmp(&ratio) != Ordering::Less => Some(x),
                    _ => Some(ratio),
                };
            }
        }
        row = next_row(g, &row);
    }
    Ok(worst.into_iter().flatten().fold(None, min_opt))
}
