//! Shortest-path feasibility.
//!
//! `lambda` is feasible when no cycle has negative weight under the
//! parametric weights `w(e) - lambda`, which holds exactly when
//! `lambda <= mu*`. The check runs the scanning method pass by pass on the
//! root-augmented graph: a graph with `N` vertices and no negative cycle
//! stops relaxing within `N` passes.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cycle::Cycle;
use crate::engine::Engine;
use crate::graph::{EdgeId, Graph, Vertex, NIL};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Unreached,
    Found,
    Scanned,
}

/// `w(e) - lambda` on every edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricWeight<W> {
    pub lambda: W,
}

impl<W: Scalar> ParametricWeight<W> {
    pub fn new(lambda: W) -> Self {
        ParametricWeight { lambda }
    }

    #[inline]
    pub fn of(&self, g: &Graph<W>, e: EdgeId) -> W {
        g.weight(e) - self.lambda
    }
}

/// Potential (`None` is +infinity), parent and label of every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanState<W> {
    pub potential: Vec<Option<W>>,
    pub parent: Vec<Vertex>,
    pub parent_edge: Vec<EdgeId>,
    pub label: Vec<Label>,
}

#[inline]
fn improves<W: Scalar>(candidate: W, current: Option<W>) -> bool {
    match current {
        None => true,
        Some(c) => candidate.definitely_lt(c),
    }
}

impl<W: Scalar> ScanState<W> {
    /// Every vertex unreached with infinite potential.
    pub fn new(n: usize) -> Self {
        ScanState {
            potential: vec![None; n],
            parent: vec![NIL; n],
            parent_edge: vec![NIL; n],
            label: vec![Label::Unreached; n],
        }
    }

    /// Only `root` is found, at potential zero.
    pub fn rooted(n: usize, root: Vertex) -> Self {
        let mut s = Self::new(n);
        s.potential[root] = Some(W::zero());
        s.label[root] = Label::Found;
        s
    }

    /// Scans the found vertex `u`: marks it scanned and relaxes every
    /// out-edge whose reduced weight improves the target's potential.
    /// `on_found` is called for every relaxed target.
    pub fn scan(
        &mut self,
        g: &Graph<W>,
        pw: &ParametricWeight<W>,
        u: Vertex,
        mut on_found: impl FnMut(Vertex),
    ) {
        debug_assert_eq!(
            self.label[u],
            Label::Found,
            "only found vertices are scanned"
        );
        let pu = self.potential[u].expect("found vertex has a potential");
        // Marked before relaxing so that a negative self-loop re-finds `u`.
        self.label[u] = Label::Scanned;
        for e in g.out_edges(u) {
            let v = g.target(e);
            let candidate = pu + pw.of(g, e);
            if improves(candidate, self.potential[v]) {
                self.potential[v] = Some(candidate);
                self.parent[v] = u;
                self.parent_edge[v] = e;
                self.label[v] = Label::Found;
                on_found(v);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility<W> {
    Feasible,
    /// A cycle of the input graph with negative reduced weight.
    NegativeCycle(Cycle<W>),
}

impl<W> Feasibility<W> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpfReport<W> {
    pub verdict: Feasibility<W>,
    pub passes: usize,
}

/// Scanning order of the frontier within one pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanOrder {
    #[default]
    Ascending,
    Descending,
    Shuffled(u64),
}

/// Feasibility of `lambda` on `g` (scanned in ascending order).
pub fn spf_feasible<W: Scalar>(g: &Graph<W>, lambda: W) -> SpfReport<W> {
    spf_feasible_ordered(g, lambda, ScanOrder::Ascending)
}

pub fn spf_feasible_ordered<W: Scalar>(g: &Graph<W>, lambda: W, order: ScanOrder) -> SpfReport<W> {
    let n = g.vertex_count();
    let aug = g.augment_root();
    let big_n = n + 1;
    let root = n;
    let pw = ParametricWeight::new(lambda);
    let mut state = ScanState::rooted(big_n, root);
    let mut rng = match order {
        ScanOrder::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut frontier = vec![root];
    let mut in_next = vec![false; big_n];
    let mut passes = 0;
    loop {
        passes += 1;
        match order {
            ScanOrder::Ascending => frontier.sort_unstable(),
            ScanOrder::Descending => frontier.sort_unstable_by(|a, b| b.cmp(a)),
            ScanOrder::Shuffled(_) => {
                frontier.shuffle(rng.as_mut().expect("rng for shuffled order"))
            }
        }
        let mut next = Vec::new();
        for &u in &frontier {
            if state.label[u] != Label::Found {
                continue;
            }
            state.scan(&aug, &pw, u, |v| {
                if !in_next[v] {
                    in_next[v] = true;
                    next.push(v);
                }
            });
        }
        for &v in &next {
            in_next[v] = false;
        }
        if next.is_empty() {
            return SpfReport {
                verdict: Feasibility::Feasible,
                passes,
            };
        }
        if passes >= big_n {
            if let Some(cycle) = negative_parent_cycle(&aug, &state.parent_edge, lambda, n) {
                return SpfReport {
                    verdict: Feasibility::NegativeCycle(cycle),
                    passes,
                };
            }
        }
        frontier = next;
    }
}

/// Pass-parallel variant: every pass is one pull kernel over all vertices
/// that reads the previous pass's potentials (layered relaxation).
pub fn spf_feasible_par<W: Scalar>(g: &Graph<W>, lambda: W, engine: &Engine) -> SpfReport<W> {
    #[derive(Clone, Copy)]
    struct Cell<W> {
        potential: Option<W>,
        parent_edge: EdgeId,
        found: bool,
    }

    let n = g.vertex_count();
    let aug = g.augment_root();
    let big_n = n + 1;
    let root = n;
    let pw = ParametricWeight::new(lambda);
    let mut cur = vec![
        Cell {
            potential: None,
            parent_edge: NIL,
            found: false
        };
        big_n
    ];
    cur[root] = Cell {
        potential: Some(W::zero()),
        parent_edge: NIL,
        found: true,
    };
    let mut next = cur.clone();
    let mut passes = 0;
    loop {
        passes += 1;
        {
            let prev = &cur;
            let aug = &aug;
            engine.launch(&mut next, |v, out| {
                let mut best = prev[v].potential;
                let mut parent = prev[v].parent_edge;
                let mut found = false;
                for slot in aug.in_slots(v) {
                    let u = aug.bwd_source()[slot];
                    if !prev[u].found {
                        continue;
                    }
                    let e = aug.bwd_fwd_edge()[slot];
                    let candidate =
                        prev[u].potential.expect("frontier vertex has a potential") + pw.of(aug, e);
                    if improves(candidate, best) {
                        best = Some(candidate);
                        parent = e;
                        found = true;
                    }
                }
                *out = Cell {
                    potential: best,
                    parent_edge: parent,
                    found,
                };
            });
        }
        std::mem::swap(&mut cur, &mut next);
        if !cur.iter().any(|c| c.found) {
            return SpfReport {
                verdict: Feasibility::Feasible,
                passes,
            };
        }
        if passes >= big_n {
            let parents: Vec<EdgeId> = cur.iter().map(|c| c.parent_edge).collect();
            if let Some(cycle) = negative_parent_cycle(&aug, &parents, lambda, n) {
                return SpfReport {
                    verdict: Feasibility::NegativeCycle(cycle),
                    passes,
                };
            }
        }
    }
}

/// Looks for a cycle with negative reduced weight in the parent graph.
///
/// Edge ids of the original graph coincide with the first `m` edges of the
/// root-augmented graph, so the returned cycle is expressed in `g`'s ids.
fn negative_parent_cycle<W: Scalar>(
    aug: &Graph<W>,
    parent_edge: &[EdgeId],
    lambda: W,
    n: usize,
) -> Option<Cycle<W>> {
    const UNSEEN: usize = usize::MAX;
    let mut walk_id = vec![UNSEEN; n];
    for start in 0..n {
        if walk_id[start] != UNSEEN {
            continue;
        }
        let mut v = start;
        // Follow parents until the root, a vertex of an earlier walk, or a repeat.
        while v < n && walk_id[v] == UNSEEN {
            walk_id[v] = start;
            let e = parent_edge[v];
            if e == NIL {
                v = NIL;
                break;
            }
            v = aug.source(e);
        }
        if v < n && walk_id[v] == start {
            let mut edges = Vec::new();
            let mut x = v;
            loop {
                let e = parent_edge[x];
                edges.push(e);
                x = aug.source(e);
                if x == v {
                    break;
                }
            }
            edges.reverse();
            let mut cycle = Cycle::from_edges(aug, edges);
            if cycle.reduced_weight(lambda).definitely_lt(W::zero()) {
                cycle.rotate_to_anchor(aug);
                return Some(cycle);
            }
        }
    }
    None
}
