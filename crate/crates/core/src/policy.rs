//! Policy graph and value arrays shared by the sequential and the
//! data-parallel Howard solvers.

use crate::cycle::{Cycle, CycleRecord};
use crate::graph::{EdgeId, Graph, Vertex, NIL};
use crate::scalar::Scalar;

/// Per-vertex status bits of the policy graph.
pub mod flags {
    /// Not on any policy cycle (trimmed by elimination).
    pub const ELIMINATED: u8 = 1 << 0;
    /// Member of the currently active breadth-first layer.
    pub const PROPAGATE: u8 = 1 << 1;
    /// Vertex belongs to a region that is still being solved.
    pub const WORK: u8 = 1 << 2;
    /// Policy path of the vertex reaches the selected minimal cycle.
    pub const ON_MIN_COMPONENT: u8 = 1 << 3;
    /// Vertex lies on the selected minimal cycle.
    pub const ON_MIN_CYCLE: u8 = 1 << 4;
    /// Propagation source (anchor of the selected minimal cycle).
    pub const SOURCE: u8 = 1 << 5;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyEntry {
    /// Forward edge id of the chosen successor, or `NIL`.
    pub succ: EdgeId,
    pub flags: u8,
}

impl PolicyEntry {
    pub const EMPTY: PolicyEntry = PolicyEntry {
        succ: NIL,
        flags: 0,
    };

    #[inline]
    pub fn has(&self, flag: u8) -> bool {
        self.flags & flag != 0
    }

    #[inline]
    pub fn set(&mut self, flag: u8) {
        self.flags |= flag;
    }

    #[inline]
    pub fn unset(&mut self, flag: u8) {
        self.flags &= !flag;
    }
}

/// One chosen out-edge per vertex (the policy) plus status flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyGraph {
    pub entries: Vec<PolicyEntry>,
}

impl PolicyGraph {
    pub fn new(n: usize) -> Self {
        PolicyGraph {
            entries: vec![PolicyEntry::EMPTY; n],
        }
    }

    /// Builds a policy from explicit successor edges.
    pub fn from_succ(succ: &[EdgeId]) -> Self {
        PolicyGraph {
            entries: succ
                .iter()
                .map(|&succ| PolicyEntry { succ, flags: 0 })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn succ(&self, v: Vertex) -> EdgeId {
        self.entries[v].succ
    }

    /// Successor vertex of `v` in the policy graph.
    #[inline]
    pub fn next<W: Scalar>(&self, g: &Graph<W>, v: Vertex) -> Vertex {
        g.target(self.entries[v].succ)
    }

    /// Successor edges in vertex order.
    pub fn succ_edges(&self) -> Vec<EdgeId> {
        self.entries.iter().map(|e| e.succ).collect()
    }

    /// Whether `u`'s policy edge is the forward edge `e`.
    #[inline]
    pub fn is_policy_edge(&self, u: Vertex, e: EdgeId) -> bool {
        self.entries[u].succ == e
    }

    /// Edge sequence of the policy cycle through `v`, starting at `v`.
    /// `v` must lie on a cycle.
    pub fn cycle_edges<W: Scalar>(&self, g: &Graph<W>, v: Vertex) -> Vec<EdgeId> {
        let mut edges = Vec::new();
        let mut x = v;
        loop {
            let e = self.entries[x].succ;
            edges.push(e);
            x = g.target(e);
            if x == v || edges.len() > self.len() {
                break;
            }
        }
        edges
    }

    pub fn cycle<W: Scalar>(&self, g: &Graph<W>, v: Vertex) -> Cycle<W> {
        let mut c = Cycle::from_edges(g, self.cycle_edges(g, v));
        c.rotate_to_anchor(g);
        c
    }
}

/// Two alternating per-vertex value arrays. Iteration `i` reads
/// `val[i % 2]` and improvement writes `val[(i + 1) % 2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuePair<W> {
    pub val: [Vec<W>; 2],
}

impl<W: Scalar> ValuePair<W> {
    pub fn zeros(n: usize) -> Self {
        ValuePair {
            val: [vec![W::zero(); n], vec![W::zero(); n]],
        }
    }

    pub fn current(&self, i: usize) -> &[W] {
        &self.val[i % 2]
    }

    pub fn current_mut(&mut self, i: usize) -> &mut [W] {
        &mut self.val[i % 2]
    }

    /// `(read, write)` arrays of iteration `i`.
    pub fn split(&mut self, i: usize) -> (&[W], &mut [W]) {
        let [a, b] = &mut self.val;
        if i.is_multiple_of(2) {
            (a, b)
        } else {
            (b, a)
        }
    }
}

/// One record per policy cycle, in order of discovery from vertex 0 upward.
///
/// Every vertex must have a successor. Each vertex is visited once: walks
/// stop at the first vertex already colored by any walk.
pub fn find_policy_cycles<W: Scalar>(pg: &PolicyGraph, g: &Graph<W>) -> Vec<CycleRecord<W>> {
    const UNSEEN: usize = usize::MAX;
    let n = pg.len();
    let mut color = vec![UNSEEN; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if color[start] != UNSEEN {
            continue;
        }
        let mut v = start;
        while color[v] == UNSEEN {
            color[v] = start;
            v = pg.next(g, v);
        }
        if color[v] == start {
            let mut length = 0;
            let mut weight = W::zero();
            let mut anchor = v;
            let mut x = v;
            loop {
                let e = pg.succ(x);
                length += 1;
                weight = weight + g.weight(e);
                anchor = anchor.min(x);
                x = g.target(e);
                if x == v {
                    break;
                }
            }
            cycles.push(CycleRecord::new(anchor, length, weight));
        }
    }
    cycles
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Policy on 5 vertices: 0 <-> 1 (weights 1, 3) and 2 -> 3 -> 4 -> 2
    /// (weights 2, 2, 3).
    fn two_component_policy() -> (Graph<f64>, PolicyGraph) {
        let g = Graph::from_edges(
            5,
            &[
                (0, 1, 1.0),
                (1, 0, 3.0),
                (2, 3, 2.0),
                (3, 4, 2.0),
                (4, 2, 3.0),
                (4, 0, 9.0),
            ],
        )
        .unwrap();
        (g, PolicyGraph::from_succ(&[0, 1, 2, 3, 4]))
    }

    #[test]
    fn single_cycle_policy() {
        let g =
            Graph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 5.0)]).unwrap();
        let pg = PolicyGraph::from_succ(&[0, 1, 2, 3]);
        let c = find_policy_cycles(&pg, &g);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].length, 4);
        assert_eq!(c[0].mean, 2.0);
    }

    #[test]
    fn two_components_two_records() {
        let (g, pg) = two_component_policy();
        let c = find_policy_cycles(&pg, &g);
        // Means by enumeration: (1 + 3) / 2 = 2 and (2 + 2 + 3) / 3 = 7/3.
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].anchor, c[0].length, c[0].mean), (0, 2, 2.0));
        assert_eq!((c[1].anchor, c[1].length), (2, 3));
        assert!((c[1].mean - 7.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn self_loop_record() {
        let g = Graph::from_edges(2, &[(0, 0, 4.5), (1, 0, 1.0)]).unwrap();
        let pg = PolicyGraph::from_succ(&[0, 1]);
        let c = find_policy_cycles(&pg, &g);
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].anchor, c[0].length, c[0].mean), (0, 1, 4.5));
    }

    #[test]
    fn cycle_edges_rotate_to_anchor() {
        let (g, pg) = two_component_policy();
        let c = pg.cycle(&g, 4);
        assert_eq!(c.vertices(&g), vec![2, 3, 4]);
        assert!(c.is_valid_in(&g));
    }

    #[test]
    fn value_pair_parity() {
        let mut vp = ValuePair::<f64>::zeros(2);
        {
            let (read, write) = vp.split(1);
            assert_eq!(read.len(), 2);
            write[0] = 7.0;
        }
        assert_eq!(vp.current(0)[0], 7.0);
        assert_eq!(vp.current(1)[0], 0.0);
    }
}
