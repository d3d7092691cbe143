//! Strongly connected components and region-wise solving.
//!
//! A *region* is one strongly connected component. Minimum cycle means of a
//! general graph are the smallest of the per-region results, so every region
//! can be solved on its own, or all of them together in shared launches.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;

use crate::cycle::{Cycle, CycleRecord};
use crate::engine::{CasCell, Engine, FixpointFlag};
use crate::error::Result;
use crate::graph::{Graph, Vertex, NIL};
use crate::howard::howard_solve;
use crate::howard_par::{howard_par_solve_regions, HowardParOptions, HowardParStats};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMap {
    pub region_id: Vec<usize>,
    pub region_count: usize,
    /// Single vertex without a self-loop: contains no cycle.
    pub is_trivial: Vec<bool>,
}

impl RegionMap {
    /// All `n` vertices in one non-trivial region.
    pub fn single(n: usize) -> Self {
        RegionMap {
            region_id: vec![0; n],
            region_count: 1,
            is_trivial: vec![false],
        }
    }

    /// Builds a map from arbitrary per-vertex labels; ids are assigned in
    /// order of first appearance.
    pub fn from_labels<W: Scalar>(g: &Graph<W>, labels: &[usize]) -> Self {
        let n = g.vertex_count();
        let mut dense = vec![NIL; labels.iter().copied().max().map_or(0, |m| m + 1)];
        let mut region_id = vec![0; n];
        let mut size = Vec::new();
        for v in 0..n {
            let l = labels[v];
            if dense[l] == NIL {
                dense[l] = size.len();
                size.push(0usize);
            }
            region_id[v] = dense[l];
            size[dense[l]] += 1;
        }
        let mut is_trivial: Vec<bool> = size.iter().map(|&s| s == 1).collect();
        for v in 0..n {
            if g.has_self_loop(v) {
                is_trivial[region_id[v]] = false;
            }
        }
        RegionMap {
            region_id,
            region_count: size.len(),
            is_trivial,
        }
    }

    /// Vertices of every region, ascending.
    pub fn members(&self) -> Vec<Vec<Vertex>> {
        let mut out = vec![Vec::new(); self.region_count];
        for (v, &r) in self.region_id.iter().enumerate() {
            out[r].push(v);
        }
        out
    }

    /// The partition as sorted vertex sets, independent of id assignment.
    pub fn canonical(&self) -> Vec<Vec<Vertex>> {
        let mut parts = self.members();
        parts.sort();
        parts
    }

    pub fn nontrivial_count(&self) -> usize {
        self.is_trivial.iter().filter(|t| !**t).count()
    }
}

/// Tarjan's algorithm with an explicit stack. Components are numbered in
/// order of completion, starting the search from vertex 0 upward.
pub fn tarjan_scc<W: Scalar>(g: &Graph<W>) -> RegionMap {
    let n = g.vertex_count();
    let mut index = vec![NIL; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut component = vec![NIL; n];
    let mut count = 0;
    let mut next_index = 0;
    // (vertex, next out-edge to examine)
    let mut calls: Vec<(Vertex, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != NIL {
            continue;
        }
        calls.push((root, g.out_edges(root).start));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut e)) = calls.last_mut() {
            if *e < g.out_edges(v).end {
                let w = g.target(*e);
                *e += 1;
                if index[w] == NIL {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, g.out_edges(w).start));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("component members are on the stack");
                    on_stack[w] = false;
                    component[w] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    let mut is_trivial = vec![true; count];
    let mut size = vec![0usize; count];
    for v in 0..n {
        size[component[v]] += 1;
    }
    for c in 0..count {
        is_trivial[c] = size[c] == 1;
    }
    for v in 0..n {
        if g.has_self_loop(v) {
            is_trivial[component[v]] = false;
        }
    }
    RegionMap {
        region_id: component,
        region_count: count,
        is_trivial,
    }
}

/// Trimming plus multi-pivot forward/backward reachability.
///
/// Every round first trims vertices with no remaining predecessor or
/// successor inside their subproblem (each is its own component), then picks
/// the smallest vertex of every subproblem as pivot, searches forward and
/// backward from all pivots at once, and splits each subproblem into the
/// pivot's component and the three remaining classes. Regions are numbered
/// by their smallest vertex.
pub fn parallel_scc<W: Scalar>(g: &Graph<W>, engine: &Engine) -> Result<RegionMap> {
    let n = g.vertex_count();
    let mut color = vec![0usize; n];
    let mut label = vec![NIL; n];
    let mut remaining = n;
    while remaining > 0 {
        remaining -= trim(g, engine, &color, &mut label)?;
        if remaining == 0 {
            break;
        }
        let cells: Vec<CasCell> = (0..3 * n + 1).map(|_| CasCell::empty()).collect();
        engine.launch_each(n, |v| {
            if label[v] == NIL {
                cells[color[v]].vote_min(v as u64, |a, b| a < b);
            }
        });
        let pivot_of = |v: Vertex| cells[color[v]].load() as usize;
        let mut is_pivot = vec![false; n];
        engine.launch(&mut is_pivot, |v, p| {
            *p = label[v] == NIL && pivot_of(v) == v
        });
        let fw = reach(g, engine, &color, &label, &is_pivot, true);
        let bw = reach(g, engine, &color, &label, &is_pivot, false);
        let assigned = AtomicUsize::new(0);
        engine.launch2(&mut color, &mut label, |v, c, l| {
            if *l != NIL {
                return;
            }
            let p = cells[*c].load() as usize;
            match (
                fw[v].load(AtomicOrdering::Relaxed),
                bw[v].load(AtomicOrdering::Relaxed),
            ) {
                (true, true) => {
                    *l = p;
                    assigned.fetch_add(1, AtomicOrdering::Relaxed);
                }
                (true, false) => *c = 3 * p + 1,
                (false, true) => *c = 3 * p + 2,
                (false, false) => *c = 3 * p + 3,
            }
        });
        remaining -= assigned.into_inner();
    }
    Ok(RegionMap::from_labels(g, &label))
}

/// Unassigned vertex `v` can be trimmed when no unassigned vertex of its
/// subproblem other than itself is a predecessor, or none is a successor.
fn trim<W: Scalar>(
    g: &Graph<W>,
    engine: &Engine,
    color: &[usize],
    label: &mut Vec<usize>,
) -> Result<usize> {
    let n = g.vertex_count();
    let mut total = 0;
    let mut next = label.clone();
    engine.fixpoint(n + 1, || {
        let progress = FixpointFlag::new();
        let trimmed = AtomicUsize::new(0);
        {
            let cur = &*label;
            let live = |u: Vertex, v: Vertex| u != v && cur[u] == NIL && color[u] == color[v];
            engine.launch(&mut next, |v, out| {
                *out = cur[v];
                if cur[v] != NIL {
                    return;
                }
                let has_in = g.in_slots(v).any(|s| live(g.bwd_source()[s], v));
                let has_out = g.out_edges(v).any(|e| live(g.target(e), v));
                if !has_in || !has_out {
                    *out = v;
                    trimmed.fetch_add(1, AtomicOrdering::Relaxed);
                    progress.raise();
                }
            });
        }
        std::mem::swap(label, &mut next);
        total += trimmed.into_inner();
        Ok(progress.is_raised())
    })?;
    Ok(total)
}

/// Breadth-first reachability from all pivots at once, staying inside each
/// pivot's subproblem. Frontiers are processed one launch per level.
fn reach<W: Scalar>(
    g: &Graph<W>,
    engine: &Engine,
    color: &[usize],
    label: &[usize],
    is_pivot: &[bool],
    forward: bool,
) -> Vec<AtomicBool> {
    let n = g.vertex_count();
    let reached: Vec<AtomicBool> = is_pivot.iter().map(|&p| AtomicBool::new(p)).collect();
    let mut frontier: Vec<Vertex> = (0..n).filter(|&v| is_pivot[v]).collect();
    while !frontier.is_empty() {
        let next = Mutex::new(Vec::new());
        engine.launch_each(frontier.len(), |i| {
            let v = frontier[i];
            let mut found = Vec::new();
            let mut visit = |t: Vertex| {
                if label[t] == NIL
                    && color[t] == color[v]
                    && !reached[t].swap(true, AtomicOrdering::Relaxed)
                {
                    found.push(t);
                }
            };
            if forward {
                g.out_edges(v).for_each(|e| visit(g.target(e)));
            } else {
                g.in_slots(v).for_each(|s| visit(g.bwd_source()[s]));
            }
            if !found.is_empty() {
                next.lock().expect("frontier lock poisoned").extend(found);
            }
        });
        frontier = next.into_inner().expect("frontier lock poisoned");
        frontier.sort_unstable();
    }
    reached
}

/// Offers the cycle anchored at `candidate` to a region's voting cell. The
/// cell keeps the smallest record by `(mean, anchor)` whatever the order of
/// offers. Returns true when the candidate was installed.
pub fn region_vote_min<W: Scalar>(
    cell: &CasCell,
    candidate: Vertex,
    records: &[Option<CycleRecord<W>>],
) -> bool {
    let key = |a: u64| {
        records[a as usize]
            .as_ref()
            .expect("voted slot holds a record")
    };
    cell.vote_min(candidate as u64, |a, b| key(a).cmp_key(key(b)).is_lt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SccAlgorithm {
    #[default]
    Tarjan,
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposed<W> {
    /// `None` when the graph has no cycle.
    pub mu_star: Option<W>,
    pub critical: Option<Cycle<W>>,
    pub regions: RegionMap,
    /// Result of each region; `None` for trivial regions.
    pub per_region: Vec<Option<W>>,
    /// Present when the regions were solved with the parallel solver.
    pub par_stats: Option<HowardParStats>,
    /// Sum of outer iterations over all regions (sequential solving).
    pub outer_iterations: usize,
}

/// How the regions of a decomposed graph are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegionSolver {
    /// Extract every non-trivial region and run the sequential solver on it.
    #[default]
    Sequential,
    /// Run all regions together in the data-parallel solver.
    Parallel,
}

/// Minimum cycle mean of any digraph, region by region. `engine` runs the
/// parallel decomposition and the parallel solver when those are selected.
pub fn solve_decomposed<W: Scalar>(
    g: &Graph<W>,
    scc: SccAlgorithm,
    solver: RegionSolver,
    engine: &Engine,
) -> Result<Decomposed<W>> {
    let regions = match scc {
        SccAlgorithm::Tarjan => tarjan_scc(g),
        SccAlgorithm::Parallel => parallel_scc(g, engine)?,
    };
    match solver {
        RegionSolver::Sequential => solve_regions_sequential(g, regions),
        RegionSolver::Parallel => {
            let res = howard_par_solve_regions(g, engine, &regions, HowardParOptions::default())?;
            Ok(Decomposed {
                mu_star: res.mu_star,
                critical: res.critical,
                per_region: res.regions.iter().map(|r| r.mu).collect(),
                outer_iterations: res.stats.outer_iterations,
                par_stats: Some(res.stats),
                regions,
            })
        }
    }
}

fn solve_regions_sequential<W: Scalar>(g: &Graph<W>, regions: RegionMap) -> Result<Decomposed<W>> {
    let mut per_region = vec![None; regions.region_count];
    let mut best: Option<Cycle<W>> = None;
    let mut outer_iterations = 0;
    for (r, members) in regions.members().into_iter().enumerate() {
        if regions.is_trivial[r] {
            continue;
        }
        let (sub, origin) = g.induced_subgraph(&members);
        let res = howard_solve(&sub)?;
        outer_iterations += res.iterations;
        per_region[r] = Some(res.mu_star);
        let cycle = Cycle::from_edges(g, res.critical.edges.iter().map(|&e| origin[e]).collect());
        if best
            .as_ref()
            .is_none_or(|b| cycle.record.cmp_key(&b.record).is_lt())
        {
            best = Some(cycle);
        }
    }
    if let Some(c) = best.as_mut() {
        c.rotate_to_anchor(g);
    }
    Ok(Decomposed {
        mu_star: best.as_ref().map(|c| c.record.mean),
        critical: best,
        regions,
        per_region,
        par_stats: None,
        outer_iterations,
    })
}
