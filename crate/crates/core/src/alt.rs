//! Lawler's binary search and the tree-based parametric shortest path
//! method. Both are sequential and serve as independent cross-checks of the
//! policy-iteration solvers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::cycle::Cycle;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Vertex, NIL};
use crate::scalar::Scalar;
use crate::spf::{spf_feasible, Feasibility};

#[derive(Debug, Clone, PartialEq)]
pub struct LawlerResult<W> {
    /// Largest value known to be feasible.
    pub lower: W,
    /// Mean of `cycle`, an upper bound on the minimum cycle mean.
    pub upper: W,
    pub cycle: Cycle<W>,
    /// Bisection steps (the initial probes are not counted).
    pub iterations: usize,
    pub spf_passes: usize,
}

/// Bisection on `lambda` between the smallest and the largest edge weight
/// until the bracket is narrower than `epsilon`.
///
/// Every infeasible probe yields a cycle whose mean becomes the new upper
/// bound, so `upper` is always the mean of a real cycle. Returns `None` when
/// the graph has no cycle.
pub fn lawler_solve<W: Scalar>(g: &Graph<W>, epsilon: W) -> Result<Option<LawlerResult<W>>> {
    if epsilon <= W::zero() {
        return Err(Error::InvalidInput(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let (Some(w_min), Some(w_max)) = (g.min_weight(), g.max_weight()) else {
        return Ok(None);
    };
    let mut spf_passes = 0;
    let mut probe = |lambda: W| {
        let report = spf_feasible(g, lambda);
        spf_passes += report.passes;
        report.verdict
    };

    // Every cycle mean lies in [w_min, w_max]. Probing at w_max either
    // tightens the upper bound or proves w_max feasible, in which case every
    // cycle (if any; probing just above w_max finds one) has mean w_max.
    let (mut best, mut lower) = match probe(w_max) {
        Feasibility::NegativeCycle(c) => (c, w_min),
        Feasibility::Feasible => match probe(w_max + W::one()) {
            Feasibility::NegativeCycle(c) => (c, w_max),
            Feasibility::Feasible => return Ok(None),
        },
    };
    let mut upper = best.record.mean;
    let mut iterations = 0;
    while (upper - lower).total_cmp(&epsilon) != Ordering::Less {
        let mid = W::midpoint(lower, upper);
        if mid == lower || mid == upper {
            // The bracket is as narrow as the scalar can represent.
            break;
        }
        iterations += 1;
        match probe(mid) {
            Feasibility::Feasible => lower = mid,
            Feasibility::NegativeCycle(c) => {
                upper = c.record.mean;
                best = c;
            }
        }
        if upper.total_cmp(&lower) == Ordering::Less {
            return Err(Error::Internal(format!(
                "bisection bracket inverted: {lower} > {upper}"
            )));
        }
    }
    best.rotate_to_anchor(g);
    Ok(Some(LawlerResult {
        lower,
        upper,
        cycle: best,
        iterations,
        spf_passes,
    }))
}

/// Upper bound on bisection steps from an initial bracket of width
/// `w_max - w_min`: `max(0, ceil(lg((w_max - w_min) / epsilon)))`.
pub fn lawler_iteration_bound(w_min: f64, w_max: f64, epsilon: f64) -> usize {
    let ratio = (w_max - w_min) / epsilon;
    if ratio <= 1.0 {
        0
    } else {
        ratio.log2().ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeResult<W> {
    pub mu_star: W,
    /// A cycle of reduced weight zero at `mu_star`.
    pub cycle: Cycle<W>,
    /// `lambda` at every tree change, ending with `mu_star`.
    pub lambdas: Vec<W>,
}

/// Heap entry ordered so that `BinaryHeap` pops the smallest `(theta, edge)`.
struct Candidate<W> {
    theta: W,
    edge: EdgeId,
}

impl<W: Scalar> PartialEq for Candidate<W> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<W: Scalar> Eq for Candidate<W> {}

impl<W: Scalar> PartialOrd for Candidate<W> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<W: Scalar> Ord for Candidate<W> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .theta
            .total_cmp(&self.theta)
            .then(other.edge.cmp(&self.edge))
    }
}

/// Shortest-path tree from an implicit root with a zero-weight edge to
/// every vertex, kept as path weight `a(v)` and path length `k(v)` so that
/// the distance under `w - lambda` is `a(v) - lambda * k(v)`.
struct ParametricTree<W> {
    a: Vec<W>,
    k: Vec<usize>,
    parent_edge: Vec<EdgeId>,
    children: Vec<Vec<Vertex>>,
}

impl<W: Scalar> ParametricTree<W> {
    fn star(n: usize) -> Self {
        ParametricTree {
            a: vec![W::zero(); n],
            k: vec![1; n],
            parent_edge: vec![NIL; n],
            children: vec![Vec::new(); n],
        }
    }

    /// The `lambda` above which edge `(u, v)` undercuts `v`'s tree path:
    /// `(a(u) + w - a(v)) / (k(u) + 1 - k(v))`, defined when the length
    /// difference is positive.
    fn threshold(&self, g: &Graph<W>, e: EdgeId) -> Option<W> {
        let (u, v) = (g.source(e), g.target(e));
        if self.parent_edge[v] == e || self.k[u] < self.k[v] {
            return None;
        }
        let dk = self.k[u] + 1 - self.k[v];
        Some((self.a[u] + g.weight(e) - self.a[v]) / W::from_count(dk))
    }

    fn parent(&self, g: &Graph<W>, v: Vertex) -> Vertex {
        match self.parent_edge[v] {
            NIL => NIL,
            e => g.source(e),
        }
    }

    fn is_ancestor_or_self(&self, g: &Graph<W>, v: Vertex, mut u: Vertex) -> bool {
        while u != NIL {
            if u == v {
                return true;
            }
            u = self.parent(g, u);
        }
        false
    }

    fn subtree(&self, v: Vertex) -> Vec<Vertex> {
        let mut out = vec![v];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.children[out[i]]);
            i += 1;
        }
        out
    }

    /// Makes `e = (u, v)` the tree edge of `v` and shifts `v`'s subtree.
    fn reparent(&mut self, g: &Graph<W>, e: EdgeId) -> Vec<Vertex> {
        let (u, v) = (g.source(e), g.target(e));
        let old = self.parent(g, v);
        if old != NIL {
            self.children[old].retain(|&c| c != v);
        }
        self.children[u].push(v);
        self.parent_edge[v] = e;
        let da = self.a[u] + g.weight(e) - self.a[v];
        let dk = self.k[u] + 1 - self.k[v];
        let moved = self.subtree(v);
        for &x in &moved {
            self.a[x] = self.a[x] + da;
            self.k[x] += dk;
        }
        moved
    }

    /// Tree path from `v` down to `u` followed by the edge `e = (u, v)`.
    fn closing_cycle(&self, g: &Graph<W>, e: EdgeId) -> Cycle<W> {
        let v = g.target(e);
        let mut edges = vec![e];
        let mut x = g.source(e);
        while x != v {
            let pe = self.parent_edge[x];
            edges.push(pe);
            x = g.source(pe);
        }
        edges.reverse();
        let mut c = Cycle::from_edges(g, edges);
        c.rotate_to_anchor(g);
        c
    }
}

/// Exact minimum cycle mean by raising `lambda` from below the smallest
/// edge weight and maintaining a shortest-path tree under `w - lambda`.
///
/// At each step the non-tree edge with the smallest threshold either closes
/// a cycle through the tree (its threshold is then the minimum cycle mean)
/// or replaces the tree edge of its target. Candidates live in a binary heap
/// with lazy deletion: entries whose threshold no longer matches the current
/// tree are skipped when popped. Returns `None` when the graph has no cycle.
pub fn tree_solve<W: Scalar>(g: &Graph<W>) -> Result<Option<TreeResult<W>>> {
    let n = g.vertex_count();
    let mut tree = ParametricTree::star(n);
    let mut heap = BinaryHeap::new();
    let push_edge = |tree: &ParametricTree<W>, heap: &mut BinaryHeap<Candidate<W>>, e: EdgeId| {
        if let Some(theta) = tree.threshold(g, e) {
            heap.push(Candidate { theta, edge: e });
        }
    };
    for e in 0..g.edge_count() {
        push_edge(&tree, &mut heap, e);
    }
    let mut lambdas = Vec::new();
    let mut lambda: Option<W> = None;
    while let Some(Candidate { theta, edge }) = heap.pop() {
        match tree.threshold(g, edge) {
            Some(t) if t.total_cmp(&theta) == Ordering::Equal => {}
            _ => continue,
        }
        if let Some(l) = lambda {
            if theta.total_cmp(&l) == Ordering::Less && !l.approx_eq(theta) {
                return Err(Error::Internal(format!(
                    "threshold {theta} below current lambda {l}"
                )));
            }
        }
        lambda = Some(theta);
        lambdas.push(theta);
        let (u, v) = (g.source(edge), g.target(edge));
        if tree.is_ancestor_or_self(g, v, u) {
            let cycle = tree.closing_cycle(g, edge);
            return Ok(Some(TreeResult {
                mu_star: theta,
                cycle,
                lambdas,
            }));
        }
        for x in tree.reparent(g, edge) {
            for e in g.out_edges(x) {
                push_edge(&tree, &mut heap, e);
            }
            for slot in g.in_slots(x) {
                push_edge(&tree, &mut heap, g.bwd_fwd_edge()[slot]);
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::dp_min_cycle_mean;
    use crate::Rational;

    fn r(v: i64) -> Rational {
        Rational::from_integer(v as i128)
    }

    #[test]
    fn lawler_two_cycle() {
        let g = Graph::from_edges(2, &[(0, 1, 2.0), (1, 0, 4.0)]).unwrap();
        let res = lawler_solve(&g, 1e-6).unwrap().unwrap();
        assert!(res.lower <= 3.0 && 3.0 <= res.upper);
        assert_eq!(res.cycle.record.mean, 3.0);
        assert!(res.iterations <= lawler_iteration_bound(2.0, 4.0, 1e-6));
    }

    #[test]
    fn lawler_self_loop_and_errors() {
        let g = Graph::from_edges(1, &[(0, 0, r(5))]).unwrap();
        let res = lawler_solve(&g, Rational::new(1, 1000)).unwrap().unwrap();
        assert_eq!(res.upper, r(5));
        assert_eq!(res.iterations, 0);
        assert!(matches!(
            lawler_solve(&g, r(0)),
            Err(Error::InvalidInput(_))
        ));
        let dag = Graph::from_edges(2, &[(0, 1, r(1))]).unwrap();
        assert!(lawler_solve(&dag, r(1)).unwrap().is_none());
    }

    #[test]
    fn lawler_feasible_maximum_closes_the_bracket() {
        // The only cycle sits at the heaviest weight.
        let g = Graph::from_edges(2, &[(0, 0, r(5)), (0, 1, r(1))]).unwrap();
        let res = lawler_solve(&g, Rational::new(1, 2)).unwrap().unwrap();
        assert_eq!((res.lower, res.upper, res.iterations), (r(5), r(5), 0));
    }

    #[test]
    fn lawler_exact_with_small_epsilon() {
        // Means: {0,1,2} = 4/3, {1,2} = 3/2, loop at 3 = 2.
        let g = Graph::from_edges(
            4,
            &[
                (0, 1, r(1)),
                (1, 2, r(1)),
                (2, 0, r(2)),
                (2, 1, r(2)),
                (2, 3, r(9)),
                (3, 3, r(2)),
            ],
        )
        .unwrap();
        let res = lawler_solve(&g, Rational::new(1, 17)).unwrap().unwrap();
        assert_eq!(res.upper, Rational::new(4, 3));
        assert_eq!(res.cycle.vertices(&g), vec![0, 1, 2]);
    }

    #[test]
    fn lawler_stops_at_float_resolution() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0e7f32), (1, 0, -3.0e7)]).unwrap();
        let res = lawler_solve(&g, 1e-9).unwrap().unwrap();
        assert_eq!(res.upper, -1.0e7);
        assert!(res.lower <= res.upper);
    }

    #[test]
    fn iteration_bound_formula() {
        assert_eq!(lawler_iteration_bound(0.0, 8.0, 1.0), 3);
        assert_eq!(lawler_iteration_bound(0.0, 9.0, 1.0), 4);
        assert_eq!(lawler_iteration_bound(5.0, 5.0, 1.0), 0);
    }

    #[test]
    fn tree_small_cases() {
        let g = Graph::from_edges(1, &[(0, 0, r(5))]).unwrap();
        let res = tree_solve(&g).unwrap().unwrap();
        assert_eq!((res.mu_star, res.lambdas.len()), (r(5), 1));
        let g = Graph::from_edges(2, &[(0, 1, r(2)), (1, 0, r(4))]).unwrap();
        let res = tree_solve(&g).unwrap().unwrap();
        assert_eq!(res.mu_star, r(3));
        assert_eq!(res.cycle.reduced_weight(r(3)), r(0));
        let dag = Graph::from_edges(3, &[(0, 1, r(1)), (1, 2, r(-3))]).unwrap();
        assert!(tree_solve(&dag).unwrap().is_none());
    }

    #[test]
    fn tree_reparents_before_closing() {
        let g = Graph::from_edges(
            4,
            &[
                (0, 1, r(-2)),
                (1, 2, r(5)),
                (2, 0, r(0)),
                (1, 3, r(1)),
                (3, 1, r(1)),
                (3, 2, r(-4)),
            ],
        )
        .unwrap();
        let res = tree_solve(&g).unwrap().unwrap();
        assert_eq!(Some(res.mu_star), dp_min_cycle_mean(&g).unwrap());
        assert!(res.cycle.is_valid_in(&g));
        assert_eq!(res.cycle.record.mean, res.mu_star);
        assert!(res.lambdas.windows(2).all(|w| w[0] <= w[1]));
    }
}
