//! Sequential Howard policy iteration for the minimum cycle mean of a
//! strongly connected graph.
//!
//! Each outer iteration improves the policy against the current values,
//! selects the minimal-mean cycle of the policy graph as the new `lambda`,
//! rebuilds the policy so that this cycle is its only cycle, and propagates
//! values backwards from the cycle's anchor. Iteration stops when an
//! improvement pass changes no policy edge.

use std::collections::VecDeque;

use crate::cycle::{select_min_cycle, Cycle, CycleRecord};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Vertex, NIL};
use crate::policy::{find_policy_cycles, PolicyGraph, ValuePair};
use crate::scalar::Scalar;

/// Upper bound on outer iterations before reporting non-termination.
pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;

/// State after one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace<W> {
    pub lambda: W,
    pub policy: Vec<EdgeId>,
    /// The value array written by propagation in this iteration.
    pub values: Vec<W>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HowardResult<W> {
    pub mu_star: W,
    /// The final policy cycle; its mean equals `mu_star`.
    pub critical: Cycle<W>,
    /// Improvement passes performed (the last one changes nothing).
    pub iterations: usize,
    /// `lambda` chosen in every outer iteration.
    pub lambdas: Vec<W>,
    /// Filled when tracing is requested.
    pub trace: Vec<IterationTrace<W>>,
}

/// One improvement pass.
///
/// Writes `val[(i + 1) % 2][v] = min over out-edges (v, u) of
/// val[i % 2][u] + w(v, u) - lambda` and switches `v`'s policy edge only
/// when it is unset or strictly worse than the minimum. Among equal
/// candidates the smallest edge id wins. Returns whether any edge changed.
pub fn improve_policy<W: Scalar>(
    g: &Graph<W>,
    vals: &mut ValuePair<W>,
    lambda: W,
    pg: &mut PolicyGraph,
    i: usize,
) -> Result<bool> {
    let (read, write) = vals.split(i);
    let mut improved = false;
    for (v, slot) in write.iter_mut().enumerate() {
        let (best_edge, best) = best_successor(g, read, lambda, v)?;
        *slot = best;
        let current = pg.succ(v);
        if current == NIL
            || best.definitely_lt(read[g.target(current)] + g.weight(current) - lambda)
        {
            pg.entries[v].succ = best_edge;
            improved = true;
        }
    }
    Ok(improved)
}

/// Smallest-id out-edge of `v` minimizing `read[target] + w - lambda`,
/// restricted to edges accepted by `keep`.
#[inline]
pub(crate) fn best_successor_filtered<W: Scalar>(
    g: &Graph<W>,
    read: &[W],
    lambda: W,
    v: Vertex,
    keep: impl Fn(EdgeId) -> bool,
) -> Option<(EdgeId, W)> {
    let mut best: Option<(EdgeId, W)> = None;
    for e in g.out_edges(v) {
        if !keep(e) {
            continue;
        }
        let candidate = read[g.target(e)] + g.weight(e) - lambda;
        match best {
            Some((_, b)) if !candidate.definitely_lt(b) => {}
            _ => best = Some((e, candidate)),
        }
    }
    best
}

fn best_successor<W: Scalar>(
    g: &Graph<W>,
    read: &[W],
    lambda: W,
    v: Vertex,
) -> Result<(EdgeId, W)> {
    best_successor_filtered(g, read, lambda, v, |_| true)
        .ok_or_else(|| Error::Structural(format!("vertex {v} has no successor")))
}

/// Restructures `pg` so that `min_cycle` is its only cycle.
///
/// The weakly connected component of the cycle keeps its policy edges.
/// Every other vertex is attached breadth-first: in each layer, a vertex
/// with an edge into the connected set takes its smallest such edge id.
pub fn rebuild_policy<W: Scalar>(
    g: &Graph<W>,
    pg: &mut PolicyGraph,
    min_cycle: &CycleRecord<W>,
) -> Result<()> {
    let n = g.vertex_count();
    let mut connected = vec![false; n];
    let mut queue = VecDeque::new();
    let mut x = min_cycle.anchor;
    loop {
        connected[x] = true;
        queue.push_back(x);
        x = pg.next(g, x);
        if x == min_cycle.anchor {
            break;
        }
        if connected[x] {
            return Err(Error::Internal(format!(
                "anchor {} is not on a policy cycle",
                min_cycle.anchor
            )));
        }
    }
    // Component of the minimal cycle: backward reachability along policy edges.
    let mut frontier: Vec<Vertex> = Vec::new();
    while let Some(v) = queue.pop_front() {
        frontier.push(v);
        for slot in g.in_slots(v) {
            let e = g.bwd_fwd_edge()[slot];
            let u = g.source(e);
            if !connected[u] && pg.is_policy_edge(u, e) {
                connected[u] = true;
                queue.push_back(u);
            }
        }
    }
    // Remaining vertices, one breadth-first layer at a time.
    let mut remaining = connected.iter().filter(|c| !**c).count();
    let mut candidate = vec![false; n];
    while remaining > 0 && !frontier.is_empty() {
        let mut layer = Vec::new();
        for &v in &frontier {
            for slot in g.in_slots(v) {
                let u = g.bwd_source()[slot];
                if !connected[u] && !candidate[u] {
                    candidate[u] = true;
                    layer.push(u);
                }
            }
        }
        layer.sort_unstable();
        for &u in &layer {
            let e = g
                .out_edges(u)
                .find(|&e| connected[g.target(e)])
                .expect("layer vertex has an edge into the connected set");
            pg.entries[u].succ = e;
        }
        for &u in &layer {
            connected[u] = true;
            candidate[u] = false;
        }
        remaining -= layer.len();
        frontier = layer;
    }
    if remaining > 0 {
        let v = connected.iter().position(|c| !c).expect("remaining > 0");
        return Err(Error::Structural(format!(
            "vertex {v} cannot reach the minimal cycle"
        )));
    }
    Ok(())
}

/// Recomputes `val[i % 2]` from `source` backwards along policy edges:
/// `val(source) = 0`, `val(u) = val(succ(u)) + w(u, succ(u)) - lambda`.
pub fn propagate_values<W: Scalar>(
    g: &Graph<W>,
    pg: &PolicyGraph,
    vals: &mut ValuePair<W>,
    lambda: W,
    source: Vertex,
    i: usize,
) -> Result<()> {
    let n = g.vertex_count();
    let val = vals.current_mut(i);
    let mut reached = vec![false; n];
    let mut queue = VecDeque::new();
    val[source] = W::zero();
    reached[source] = true;
    queue.push_back(source);
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for slot in g.in_slots(v) {
            let e = g.bwd_fwd_edge()[slot];
            let u = g.source(e);
            if u != source && pg.is_policy_edge(u, e) {
                val[u] = val[v] + g.weight(e) - lambda;
                if !reached[u] {
                    reached[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
    }
    if count != n {
        let v = reached.iter().position(|r| !r).expect("count < n");
        return Err(Error::Internal(format!(
            "value propagation did not reach vertex {v}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HowardOptions {
    pub max_iterations: usize,
    pub trace: bool,
}

impl Default for HowardOptions {
    fn default() -> Self {
        HowardOptions {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            trace: false,
        }
    }
}

/// Minimum cycle mean of a strongly connected graph.
pub fn howard_solve<W: Scalar>(g: &Graph<W>) -> Result<HowardResult<W>> {
    howard_solve_with(g, HowardOptions::default())
}

pub fn howard_solve_with<W: Scalar>(g: &Graph<W>, opts: HowardOptions) -> Result<HowardResult<W>> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::Structural("graph has no vertices".into()));
    }
    let mut vals = ValuePair::zeros(n);
    let mut pg = PolicyGraph::new(n);
    let mut lambda = W::zero();
    let mut lambdas = Vec::new();
    let mut trace = Vec::new();
    let mut anchor = NIL;
    let mut i = 0;
    loop {
        let improved = improve_policy(g, &mut vals, lambda, &mut pg, i)?;
        i += 1;
        if !improved {
            break;
        }
        if i > opts.max_iterations {
            return Err(Error::Internal(format!(
                "no convergence after {} iterations",
                opts.max_iterations
            )));
        }
        let cycles = find_policy_cycles(&pg, g);
        let min = select_min_cycle(&cycles)
            .ok_or_else(|| Error::Internal("policy graph without cycle".into()))?;
        lambda = min.mean;
        lambdas.push(lambda);
        rebuild_policy(g, &mut pg, &min)?;
        propagate_values(g, &pg, &mut vals, lambda, min.anchor, i)?;
        anchor = min.anchor;
        if opts.trace {
            trace.push(IterationTrace {
                lambda,
                policy: pg.succ_edges(),
                values: vals.current(i).to_vec(),
            });
        }
    }
    let critical = pg.cycle(g, anchor);
    Ok(HowardResult {
        mu_star: lambda,
        critical,
        iterations: i,
        lambdas,
        trace,
    })
}
