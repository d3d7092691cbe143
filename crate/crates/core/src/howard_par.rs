//! Data-parallel Howard policy iteration.
//!
//! The host loop mirrors the sequential solver step for step, but every step
//! is a bulk-synchronous kernel launched through an [`Engine`]: improvement is
//! one launch over all vertices, cycle detection peels non-cycle vertices,
//! the policy is rebuilt one breadth-first layer per launch, and values are
//! pushed backwards from the anchor one layer per launch.
//!
//! Several regions (strongly connected components) can be solved in the same
//! launches. Each vertex carries the `WORK` flag while its region is still
//! running, every kernel skips vertices without it, and each region keeps its
//! own `lambda`.

use std::cmp::Ordering;
use std::mem;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use crate::cycle::{Cycle, CycleRecord};
use crate::engine::{CasCell, Engine, FixpointFlag};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Vertex, NIL};
use crate::howard::{best_successor_filtered, DEFAULT_MAX_ITERATIONS};
use crate::policy::{flags, PolicyEntry, PolicyGraph, ValuePair};
use crate::scalar::Scalar;
use crate::scc::{region_vote_min, RegionMap};

/// Policy predecessors of a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PredInfo {
    pub count: usize,
    /// Offset, within the vertex's backward slots, of the first slot whose
    /// edge is a policy edge. Meaningful only when `count > 0`.
    pub first: usize,
}

/// Cycle records found by [`Kernels::cycle_identification`].
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSlots<W> {
    /// `records[a]` describes the cycle whose anchor is `a`.
    pub records: Vec<Option<CycleRecord<W>>>,
    /// Anchor of the cycle through each surviving vertex, `NIL` elsewhere.
    pub anchor_of: Vec<Vertex>,
}

/// Keeps the smallest offending vertex reported from inside a kernel.
struct Fault(AtomicUsize);

impl Fault {
    fn new() -> Self {
        Fault(AtomicUsize::new(NIL))
    }

    fn report(&self, v: Vertex) {
        self.0.fetch_min(v, AtomicOrdering::Relaxed);
    }

    fn get(&self) -> Option<Vertex> {
        match self.0.load(AtomicOrdering::Relaxed) {
            NIL => None,
            v => Some(v),
        }
    }
}

/// The kernels of the parallel host loop, bound to one graph, one engine and
/// one region assignment.
pub struct Kernels<'a, W> {
    g: &'a Graph<W>,
    engine: &'a Engine,
    region: &'a [usize],
    region_count: usize,
}

impl<'a, W: Scalar> Kernels<'a, W> {
    pub fn new(g: &'a Graph<W>, engine: &'a Engine, regions: &'a RegionMap) -> Self {
        assert_eq!(
            regions.region_id.len(),
            g.vertex_count(),
            "region map does not match the graph"
        );
        Kernels {
            g,
            engine,
            region: &regions.region_id,
            region_count: regions.region_count,
        }
    }

    fn n(&self) -> usize {
        self.g.vertex_count()
    }

    /// Double-buffered update of the whole entry array: `f` sees the entries
    /// as they were before the launch.
    fn step_entries<F>(&self, entries: &mut Vec<PolicyEntry>, scratch: &mut Vec<PolicyEntry>, f: F)
    where
        F: Fn(Vertex, &[PolicyEntry]) -> PolicyEntry + Sync + Send,
    {
        scratch.resize(entries.len(), PolicyEntry::EMPTY);
        let cur: &[PolicyEntry] = entries;
        self.engine.launch(scratch, |v, out| *out = f(v, cur));
        mem::swap(entries, scratch);
    }

    /// Policy predecessors of `v` among `entries`, visited via `info`.
    fn for_each_policy_pred(
        &self,
        entries: &[PolicyEntry],
        info: PredInfo,
        v: Vertex,
        mut visit: impl FnMut(Vertex, EdgeId) -> bool,
    ) {
        if info.count == 0 {
            return;
        }
        let g = self.g;
        let mut seen = 0;
        for slot in g.in_slots(v).skip(info.first) {
            let e = g.bwd_fwd_edge()[slot];
            let u = g.source(e);
            if entries[u].succ == e {
                seen += 1;
                if !visit(u, e) || seen == info.count {
                    return;
                }
            }
        }
    }

    /// Sets `WORK` exactly on the vertices of active regions.
    pub fn set_work(&self, pg: &mut PolicyGraph, active: &[bool]) {
        let region = self.region;
        self.engine.launch(&mut pg.entries, |v, e| {
            if active[region[v]] {
                e.set(flags::WORK);
            } else {
                e.unset(flags::WORK);
            }
        });
    }

    /// Clears `WORK` on every vertex of a region that is no longer active.
    pub fn deactivate_regions(&self, pg: &mut PolicyGraph, active: &[bool]) {
        let region = self.region;
        self.engine.launch(&mut pg.entries, |v, e| {
            if e.has(flags::WORK) && !active[region[v]] {
                e.unset(flags::WORK);
            }
        });
    }

    /// One improvement pass over all working vertices, restricted to edges
    /// inside each vertex's region. Returns, per region, whether any policy
    /// edge changed.
    pub fn spf_pass_iter(
        &self,
        vals: &mut ValuePair<W>,
        lambdas: &[W],
        pg: &mut PolicyGraph,
        it: usize,
    ) -> Result<Vec<bool>> {
        let g = self.g;
        let region = self.region;
        let improved: Vec<FixpointFlag> = (0..self.region_count)
            .map(|_| FixpointFlag::new())
            .collect();
        let missing = Fault::new();
        let (read, write) = vals.split(it);
        self.engine
            .launch2(write, &mut pg.entries, |v, out, entry| {
                if !entry.has(flags::WORK) {
                    return;
                }
                let r = region[v];
                let lambda = lambdas[r];
                match best_successor_filtered(g, read, lambda, v, |e| region[g.target(e)] == r) {
                    None => missing.report(v),
                    Some((best_edge, best)) => {
                        *out = best;
                        let current = entry.succ;
                        if current == NIL
                            || best
                                .definitely_lt(read[g.target(current)] + g.weight(current) - lambda)
                        {
                            entry.succ = best_edge;
                            improved[r].raise();
                        }
                    }
                }
            });
        if let Some(v) = missing.get() {
            return Err(Error::Structural(format!("vertex {v} has no successor")));
        }
        Ok(improved.iter().map(FixpointFlag::is_raised).collect())
    }

    /// Clears the per-iteration marks of working vertices.
    pub fn reset_marks(&self, pg: &mut PolicyGraph) {
        const MARKS: u8 = flags::ELIMINATED
            | flags::PROPAGATE
            | flags::ON_MIN_COMPONENT
            | flags::ON_MIN_CYCLE
            | flags::SOURCE;
        self.engine.launch(&mut pg.entries, |_, e| {
            if e.has(flags::WORK) {
                e.unset(MARKS);
            }
        });
    }

    pub fn gpi_preprocess(&self, pg: &PolicyGraph) -> Vec<PredInfo> {
        let g = self.g;
        let entries = &pg.entries;
        let mut info = vec![PredInfo::default(); self.n()];
        self.engine.launch(&mut info, |v, out| {
            let mut pi = PredInfo::default();
            if entries[v].has(flags::WORK) {
                for (k, slot) in g.in_slots(v).enumerate() {
                    let e = g.bwd_fwd_edge()[slot];
                    if entries[g.source(e)].succ == e {
                        if pi.count == 0 {
                            pi.first = k;
                        }
                        pi.count += 1;
                    }
                }
            }
            *out = pi;
        });
        info
    }

    /// Repeatedly marks `ELIMINATED` on working vertices none of whose policy
    /// predecessors is still alive. Afterwards exactly the vertices on policy
    /// cycles survive. Returns the number of launches, including the final
    /// one that changes nothing.
    pub fn elimination_fixpoint(&self, pg: &mut PolicyGraph, info: &[PredInfo]) -> Result<usize> {
        let mut scratch = Vec::new();
        self.engine.fixpoint(self.n() + 1, || {
            let progress = FixpointFlag::new();
            self.step_entries(&mut pg.entries, &mut scratch, |v, cur| {
                let mut e = cur[v];
                if !e.has(flags::WORK) || e.has(flags::ELIMINATED) {
                    return e;
                }
                let mut live = false;
                self.for_each_policy_pred(cur, info[v], v, |u, _| {
                    live = !cur[u].has(flags::ELIMINATED);
                    !live
                });
                if !live {
                    e.set(flags::ELIMINATED);
                    progress.raise();
                }
                e
            });
            Ok(progress.is_raised())
        })
    }

    /// Finds every policy cycle among the surviving vertices. The anchor of
    /// each cycle is found by pointer jumping (minimum label over doubling
    /// windows); the anchor then walks its cycle once to fill its record.
    pub fn cycle_identification(&self, pg: &PolicyGraph) -> Result<CycleSlots<W>> {
        let g = self.g;
        let n = self.n();
        let entries = &pg.entries;
        let survives =
            |v: Vertex| entries[v].has(flags::WORK) && !entries[v].has(flags::ELIMINATED);

        let mut label = vec![NIL; n];
        let mut jump = vec![NIL; n];
        self.engine.launch2(&mut label, &mut jump, |v, l, j| {
            if survives(v) {
                let next = g.target(entries[v].succ);
                *l = v.min(next);
                *j = next;
            }
        });
        let mut next_label = vec![NIL; n];
        let mut next_jump = vec![NIL; n];
        self.engine.fixpoint(usize::BITS as usize + 2, || {
            let progress = FixpointFlag::new();
            {
                let (label, jump) = (&label, &jump);
                self.engine
                    .launch2(&mut next_label, &mut next_jump, |v, l, j| {
                        if label[v] == NIL {
                            *l = NIL;
                            *j = NIL;
                            return;
                        }
                        *l = label[v].min(label[jump[v]]);
                        *j = jump[jump[v]];
                        if *l != label[v] {
                            progress.raise();
                        }
                    });
            }
            mem::swap(&mut label, &mut next_label);
            mem::swap(&mut jump, &mut next_jump);
            Ok(progress.is_raised())
        })?;

        let runaway = Fault::new();
        let mut records = vec![None; n];
        let mut anchor_of = vec![NIL; n];
        self.engine
            .launch2(&mut records, &mut anchor_of, |v, rec, anchor| {
                *anchor = label[v];
                if label[v] != v {
                    return;
                }
                let mut length = 0;
                let mut weight = W::zero();
                let mut x = v;
                loop {
                    let e = entries[x].succ;
                    length += 1;
                    weight = weight + g.weight(e);
                    x = g.target(e);
                    if x == v {
                        break;
                    }
                    if length > n {
                        runaway.report(v);
                        return;
                    }
                }
                *rec = Some(CycleRecord::new(v, length, weight));
            });
        if let Some(v) = runaway.get() {
            return Err(Error::Internal(format!(
                "walk from vertex {v} does not close a cycle"
            )));
        }
        Ok(CycleSlots { records, anchor_of })
    }

    /// Minimal record of every region under `(mean, anchor)`: a plain
    /// reduction when there is one region, CAS voting otherwise.
    pub fn select_minima(&self, slots: &CycleSlots<W>) -> Vec<Option<CycleRecord<W>>> {
        if self.region_count == 1 {
            return vec![self.engine.reduce_min(&slots.records, |a, b| a.cmp_key(b))];
        }
        let cells: Vec<CasCell> = (0..self.region_count).map(|_| CasCell::empty()).collect();
        let region = self.region;
        let records = &slots.records;
        self.engine.launch_each(self.n(), |v| {
            if records[v].is_some() {
                region_vote_min(&cells[region[v]], v, records);
            }
        });
        cells
            .iter()
            .map(|c| match c.load() {
                CasCell::EMPTY => None,
                a => records[a as usize],
            })
            .collect()
    }

    /// Marks the winning cycle of every region and clears all other slots.
    pub fn set_min_cycle(
        &self,
        pg: &mut PolicyGraph,
        slots: &mut CycleSlots<W>,
        winners: &[Option<CycleRecord<W>>],
    ) {
        let region = self.region;
        let anchor_of = &slots.anchor_of;
        let winner_anchor = |v: Vertex| winners[region[v]].map(|w| w.anchor);
        self.engine.launch(&mut pg.entries, |v, e| {
            if !e.has(flags::WORK) || anchor_of[v] == NIL {
                return;
            }
            if winner_anchor(v) == Some(anchor_of[v]) {
                e.set(flags::ON_MIN_CYCLE | flags::ON_MIN_COMPONENT);
                if v == anchor_of[v] {
                    e.set(flags::SOURCE);
                }
            } else {
                e.unset(flags::ON_MIN_CYCLE | flags::ON_MIN_COMPONENT | flags::SOURCE);
            }
        });
        self.engine.launch(&mut slots.records, |v, rec| {
            if rec.is_some() && winner_anchor(v) != Some(v) {
                *rec = None;
            }
        });
    }

    /// Restores the vertices whose policy path reaches the minimal cycle,
    /// one layer per launch (each vertex looks at its own successor).
    pub fn mark_min_component_fixpoint(&self, pg: &mut PolicyGraph) -> Result<usize> {
        let g = self.g;
        let mut scratch = Vec::new();
        self.engine.fixpoint(self.n() + 1, || {
            let progress = FixpointFlag::new();
            self.step_entries(&mut pg.entries, &mut scratch, |v, cur| {
                let mut e = cur[v];
                if e.has(flags::WORK)
                    && !e.has(flags::ON_MIN_COMPONENT)
                    && cur[g.target(e.succ)].has(flags::ON_MIN_COMPONENT)
                {
                    e.set(flags::ON_MIN_COMPONENT);
                    e.unset(flags::ELIMINATED);
                    progress.raise();
                }
                e
            });
            Ok(progress.is_raised())
        })
    }

    /// Attaches every remaining working vertex breadth-first. `PROPAGATE`
    /// marks the newest layer; a vertex with an edge into it takes its
    /// smallest such edge id and becomes the next layer.
    pub fn connect_gpi_fixpoint(&self, pg: &mut PolicyGraph) -> Result<usize> {
        let g = self.g;
        let region = self.region;
        self.engine.launch(&mut pg.entries, |_, e| {
            if e.has(flags::WORK) {
                if e.has(flags::ON_MIN_COMPONENT) {
                    e.set(flags::PROPAGATE);
                } else {
                    e.unset(flags::PROPAGATE);
                }
            }
        });
        let mut scratch = Vec::new();
        let iterations = self.engine.fixpoint(self.n() + 1, || {
            let progress = FixpointFlag::new();
            self.step_entries(&mut pg.entries, &mut scratch, |v, cur| {
                let mut e = cur[v];
                if !e.has(flags::WORK) {
                    return e;
                }
                if e.has(flags::ON_MIN_COMPONENT) {
                    e.unset(flags::PROPAGATE);
                    return e;
                }
                let r = region[v];
                let entry = g.out_edges(v).find(|&x| {
                    let t = g.target(x);
                    region[t] == r && cur[t].has(flags::WORK) && cur[t].has(flags::PROPAGATE)
                });
                if let Some(x) = entry {
                    e.succ = x;
                    e.set(flags::ON_MIN_COMPONENT | flags::PROPAGATE);
                    progress.raise();
                }
                e
            });
            Ok(progress.is_raised())
        })?;
        let stray = pg
            .entries
            .iter()
            .position(|e| e.has(flags::WORK) && !e.has(flags::ON_MIN_COMPONENT));
        if let Some(v) = stray {
            return Err(Error::Structural(format!(
                "vertex {v} cannot reach the minimal cycle"
            )));
        }
        Ok(iterations)
    }

    /// Pushes values from the `SOURCE` vertices backwards along policy edges:
    /// every frontier vertex `v` writes `val(u) = val(v) + w(u, v) - lambda`
    /// for each policy predecessor `u` that is not a source. The caller sets
    /// the source values beforehand.
    pub fn value_propagate_fixpoint(
        &self,
        pg: &PolicyGraph,
        val: &mut [W],
        lambdas: &[W],
        info: &[PredInfo],
    ) -> Result<usize> {
        let g = self.g;
        let n = self.n();
        let region = self.region;
        let entries = &pg.entries;
        let mut frontier = vec![false; n];
        self.engine.launch(&mut frontier, |v, f| {
            *f = entries[v].has(flags::WORK) && entries[v].has(flags::SOURCE)
        });
        let mut reached = frontier.clone();
        let iterations = self.engine.fixpoint(n + 1, || {
            let writes = {
                let (frontier, val) = (&frontier, &*val);
                self.engine.launch_scatter(n, n, |v, out| {
                    if !frontier[v] {
                        return;
                    }
                    let lambda = lambdas[region[v]];
                    self.for_each_policy_pred(entries, info[v], v, |u, e| {
                        if !entries[u].has(flags::SOURCE) {
                            out.push((u, val[v] + g.weight(e) - lambda));
                        }
                        true
                    });
                })?
            };
            frontier.iter_mut().for_each(|f| *f = false);
            let progress = !writes.is_empty();
            for (u, x) in writes {
                val[u] = x;
                frontier[u] = true;
                reached[u] = true;
            }
            Ok(progress)
        })?;
        if let Some(v) = (0..n).find(|&v| entries[v].has(flags::WORK) && !reached[v]) {
            return Err(Error::Internal(format!(
                "value propagation did not reach vertex {v}"
            )));
        }
        Ok(iterations)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HowardParOptions {
    pub max_iterations: usize,
    /// Record `(lambdas, policy, values)` after every outer iteration.
    pub trace: bool,
    /// Check after every outer iteration that inactive regions were left
    /// untouched and that no policy edge leaves its region.
    pub audit: bool,
}

impl Default for HowardParOptions {
    fn default() -> Self {
        HowardParOptions {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            trace: false,
            audit: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HowardParStats {
    /// Improvement passes performed (the last one per region changes nothing).
    pub outer_iterations: usize,
    pub launches: usize,
    pub fixpoint_iterations: usize,
    /// Launches of each fixpoint kernel, one entry per outer iteration.
    pub elimination: Vec<usize>,
    pub mark_component: Vec<usize>,
    pub connect: Vec<usize>,
    pub propagate: Vec<usize>,
    /// Audit findings; always zero unless something is broken.
    pub isolation_violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParTrace<W> {
    /// `lambda` of every region after the iteration.
    pub lambdas: Vec<W>,
    pub policy: Vec<EdgeId>,
    pub values: Vec<W>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionOutcome<W> {
    /// `None` for a trivial region.
    pub mu: Option<W>,
    pub critical: Option<Cycle<W>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HowardParResult<W> {
    /// Smallest region result; `None` when every region is trivial.
    pub mu_star: Option<W>,
    pub critical: Option<Cycle<W>>,
    pub regions: Vec<RegionOutcome<W>>,
    pub stats: HowardParStats,
    pub trace: Vec<ParTrace<W>>,
}

/// Minimum cycle mean of a strongly connected graph.
pub fn howard_par_solve<W: Scalar>(g: &Graph<W>, engine: &Engine) -> Result<HowardParResult<W>> {
    howard_par_solve_with(g, engine, HowardParOptions::default())
}

pub fn howard_par_solve_with<W: Scalar>(
    g: &Graph<W>,
    engine: &Engine,
    opts: HowardParOptions,
) -> Result<HowardParResult<W>> {
    if g.vertex_count() == 0 {
        return Err(Error::Structural("graph has no vertices".into()));
    }
    howard_par_solve_regions(g, engine, &RegionMap::single(g.vertex_count()), opts)
}

/// Solves all non-trivial regions of `regions` concurrently. Each region
/// must be strongly connected.
pub fn howard_par_solve_regions<W: Scalar>(
    g: &Graph<W>,
    engine: &Engine,
    regions: &RegionMap,
    opts: HowardParOptions,
) -> Result<HowardParResult<W>> {
    let n = g.vertex_count();
    let rc = regions.region_count;
    let k = Kernels::new(g, engine, regions);
    let before = engine.stats();

    let mut pg = PolicyGraph::new(n);
    let mut vals = ValuePair::zeros(n);
    let mut lambdas = vec![W::zero(); rc];
    let mut anchors = vec![NIL; rc];
    let mut active: Vec<bool> = regions.is_trivial.iter().map(|t| !t).collect();
    let mut stats = HowardParStats::default();
    let mut trace = Vec::new();
    k.set_work(&mut pg, &active);

    let mut it = 0;
    while active.iter().any(|a| *a) {
        let snapshot = opts
            .audit
            .then(|| (pg.clone(), vals.clone(), active.clone()));
        let improved = k.spf_pass_iter(&mut vals, &lambdas, &mut pg, it)?;
        it += 1;
        let mut finished = false;
        for r in 0..rc {
            if active[r] && !improved[r] {
                active[r] = false;
                finished = true;
            }
        }
        if finished {
            k.deactivate_regions(&mut pg, &active);
        }
        if !active.iter().any(|a| *a) {
            break;
        }
        if it > opts.max_iterations {
            return Err(Error::Internal(format!(
                "no convergence after {} iterations",
                opts.max_iterations
            )));
        }

        k.reset_marks(&mut pg);
        let info = k.gpi_preprocess(&pg);
        stats
            .elimination
            .push(k.elimination_fixpoint(&mut pg, &info)?);
        let mut slots = k.cycle_identification(&pg)?;
        let winners = k.select_minima(&slots);
        for r in (0..rc).filter(|&r| active[r]) {
            let w = winners[r]
                .ok_or_else(|| Error::Internal(format!("region {r} has no policy cycle")))?;
            lambdas[r] = w.mean;
            anchors[r] = w.anchor;
        }
        k.set_min_cycle(&mut pg, &mut slots, &winners);
        stats
            .mark_component
            .push(k.mark_min_component_fixpoint(&mut pg)?);
        stats.connect.push(k.connect_gpi_fixpoint(&mut pg)?);
        {
            let val = vals.current_mut(it);
            for r in (0..rc).filter(|&r| active[r]) {
                val[anchors[r]] = W::zero();
            }
        }
        let info = k.gpi_preprocess(&pg);
        stats.propagate.push(k.value_propagate_fixpoint(
            &pg,
            vals.current_mut(it),
            &lambdas,
            &info,
        )?);

        if let Some((old_pg, old_vals, was_active)) = snapshot {
            stats.isolation_violations +=
                audit(g, regions, &was_active, &old_pg, &old_vals, &pg, &vals);
        }
        if opts.trace {
            trace.push(ParTrace {
                lambdas: lambdas.clone(),
                policy: pg.succ_edges(),
                values: vals.current(it).to_vec(),
            });
        }
    }

    let after = engine.stats();
    stats.outer_iterations = it;
    stats.launches = after.launches - before.launches;
    stats.fixpoint_iterations = after.fixpoint_iterations - before.fixpoint_iterations;

    let outcomes: Vec<RegionOutcome<W>> = (0..rc)
        .map(|r| {
            if regions.is_trivial[r] {
                RegionOutcome {
                    mu: None,
                    critical: None,
                }
            } else {
                RegionOutcome {
                    mu: Some(lambdas[r]),
                    critical: Some(pg.cycle(g, anchors[r])),
                }
            }
        })
        .collect();
    let best = outcomes
        .iter()
        .filter_map(|o| o.critical.as_ref())
        .min_by(|a, b| a.record.cmp_key(&b.record).then(Ordering::Equal))
        .cloned();
    Ok(HowardParResult {
        mu_star: best.as_ref().map(|c| c.record.mean),
        critical: best,
        regions: outcomes,
        stats,
        trace,
    })
}

fn audit<W: Scalar>(
    g: &Graph<W>,
    regions: &RegionMap,
    was_active: &[bool],
    old_pg: &PolicyGraph,
    old_vals: &ValuePair<W>,
    pg: &PolicyGraph,
    vals: &ValuePair<W>,
) -> usize {
    let mut violations = 0;
    for v in 0..g.vertex_count() {
        let r = regions.region_id[v];
        if !was_active[r] {
            let same_values =
                (0..2).all(|p| old_vals.val[p][v].total_cmp(&vals.val[p][v]) == Ordering::Equal);
            if old_pg.entries[v] != pg.entries[v] || !same_values {
                violations += 1;
            }
        } else if pg.entries[v].succ != NIL && regions.region_id[g.target(pg.entries[v].succ)] != r
        {
            violations += 1;
        }
    }
    violations
}
