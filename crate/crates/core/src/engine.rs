//! Bulk-synchronous execution substrate.
//!
//! A *launch* runs one kernel body for every index of a range and ends with a
//! barrier. Kernels read shared state only through shared borrows taken before
//! the launch and write either
//!
//! * their own cell of an output slice (`launch`, `launch2`),
//! * explicit `(index, value)` writes collected and applied after the barrier
//!   (`launch_scatter`, which rejects two writes to the same cell), or
//! * contended cells through [`CasCell`] / [`FixpointFlag`] (`launch_each`).
//!
//! Under this discipline the final state of a plain-write kernel does not
//! depend on the schedule, which is what the `Sequential`, `Parallel` and
//! `Shuffled` modes let tests check.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Ascending index order on the calling thread.
    #[default]
    Sequential,
    /// Rayon pool with the configured number of workers.
    Parallel,
    /// Seeded random permutation per launch on the calling thread.
    Shuffled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub schedule: Schedule,
    /// Worker count for `Parallel`; `0` means available hardware parallelism.
    pub workers: usize,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            schedule: Schedule::Sequential,
            workers: 0,
            seed: 0,
        }
    }
}

/// Counters reported by the benchmark harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EngineStats {
    pub launches: usize,
    pub fixpoint_iterations: usize,
}

pub struct Engine {
    schedule: Schedule,
    workers: usize,
    pool: Option<rayon::ThreadPool>,
    rng: Mutex<ChaCha8Rng>,
    launches: AtomicUsize,
    fixpoint_iterations: AtomicUsize,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("schedule", &self.schedule)
            .field("workers", &self.workers)
            .field("stats", &self.stats())
            .finish()
    }
}

impl Default for Engine {
    fn default() -> Self {
        Engine::sequential()
    }
}

impl Engine {
    pub fn new(config: EngineConfig) -> Result<Self> {
        let workers = if config.workers == 0 {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        } else {
            config.workers
        };
        let pool = match config.schedule {
            Schedule::Parallel => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| Error::InvalidInput(format!("cannot build worker pool: {e}")))?,
            ),
            _ => None,
        };
        Ok(Engine {
            schedule: config.schedule,
            workers,
            pool,
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(config.seed)),
            launches: AtomicUsize::new(0),
            fixpoint_iterations: AtomicUsize::new(0),
        })
    }

    pub fn sequential() -> Self {
        Self::new(EngineConfig::default()).expect("sequential engine needs no pool")
    }

    pub fn parallel(workers: usize) -> Result<Self> {
        Self::new(EngineConfig {
            schedule: Schedule::Parallel,
            workers,
            seed: 0,
        })
    }

    pub fn shuffled(seed: u64) -> Self {
        Self::new(EngineConfig {
            schedule: Schedule::Shuffled,
            workers: 1,
            seed,
        })
        .expect("shuffled engine needs no pool")
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn stats(&self) -> EngineStats {
        EngineStats {
            launches: self.launches.load(AtomicOrdering::Relaxed),
            fixpoint_iterations: self.fixpoint_iterations.load(AtomicOrdering::Relaxed),
        }
    }

    pub fn reset_stats(&self) {
        self.launches.store(0, AtomicOrdering::Relaxed);
        self.fixpoint_iterations.store(0, AtomicOrdering::Relaxed);
    }

    fn permutation(&self, range: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..range).collect();
        let mut rng = self.rng.lock().expect("engine rng poisoned");
        order.shuffle(&mut *rng);
        order
    }

    /// Runs `kernel(i, &mut out[i])` for every `i`.
    pub fn launch<T, F>(&self, out: &mut [T], kernel: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        self.launches.fetch_add(1, AtomicOrdering::Relaxed);
        match self.schedule {
            Schedule::Sequential => out.iter_mut().enumerate().for_each(|(i, x)| kernel(i, x)),
            Schedule::Shuffled => {
                for i in self.permutation(out.len()) {
                    kernel(i, &mut out[i]);
                }
            }
            Schedule::Parallel => {
                let pool = self.pool.as_ref().expect("parallel engine has a pool");
                pool.install(|| {
                    out.par_iter_mut()
                        .enumerate()
                        .for_each(|(i, x)| kernel(i, x))
                });
            }
        }
    }

    /// Runs `kernel(i, &mut a[i], &mut b[i])` for every `i`.
    pub fn launch2<A, B, F>(&self, a: &mut [A], b: &mut [B], kernel: F)
    where
        A: Send,
        B: Send,
        F: Fn(usize, &mut A, &mut B) + Sync + Send,
    {
        assert_eq!(
            a.len(),
            b.len(),
            "launch2 outputs must share one index range"
        );
        self.launches.fetch_add(1, AtomicOrdering::Relaxed);
        match self.schedule {
            Schedule::Sequential => a
                .iter_mut()
                .zip(b.iter_mut())
                .enumerate()
                .for_each(|(i, (x, y))| kernel(i, x, y)),
            Schedule::Shuffled => {
                for i in self.permutation(a.len()) {
                    kernel(i, &mut a[i], &mut b[i]);
                }
            }
            Schedule::Parallel => {
                let pool = self.pool.as_ref().expect("parallel engine has a pool");
                pool.install(|| {
                    a.par_iter_mut()
                        .zip(b.par_iter_mut())
                        .enumerate()
                        .for_each(|(i, (x, y))| kernel(i, x, y))
                });
            }
        }
    }

    /// Runs `kernel(i)` for `i in 0..range`; writes go through atomics only.
    pub fn launch_each<F>(&self, range: usize, kernel: F)
    where
        F: Fn(usize) + Sync + Send,
    {
        self.launches.fetch_add(1, AtomicOrdering::Relaxed);
        match self.schedule {
            Schedule::Sequential => (0..range).for_each(&kernel),
            Schedule::Shuffled => self.permutation(range).into_iter().for_each(&kernel),
            Schedule::Parallel => {
                let pool = self.pool.as_ref().expect("parallel engine has a pool");
                pool.install(|| (0..range).into_par_iter().for_each(&kernel));
            }
        }
    }

    /// Each index emits `(cell, value)` writes targeting `0..cells`. The
    /// writes are returned after the barrier for the caller to apply.
    ///
    /// Two writes to one cell in a single launch are a contract violation.
    pub fn launch_scatter<T, F>(
        &self,
        range: usize,
        cells: usize,
        kernel: F,
    ) -> Result<Vec<(usize, T)>>
    where
        T: Send,
        F: Fn(usize, &mut Vec<(usize, T)>) + Sync + Send,
    {
        self.launches.fetch_add(1, AtomicOrdering::Relaxed);
        let writes: Vec<(usize, T)> = match self.schedule {
            Schedule::Sequential => {
                let mut acc = Vec::new();
                (0..range).for_each(|i| kernel(i, &mut acc));
                acc
            }
            Schedule::Shuffled => {
                let mut acc = Vec::new();
                self.permutation(range)
                    .into_iter()
                    .for_each(|i| kernel(i, &mut acc));
                acc
            }
            Schedule::Parallel => {
                let pool = self.pool.as_ref().expect("parallel engine has a pool");
                pool.install(|| {
                    (0..range)
                        .into_par_iter()
                        .fold(Vec::new, |mut acc, i| {
                            kernel(i, &mut acc);
                            acc
                        })
                        .reduce(Vec::new, |mut a, mut b| {
                            a.append(&mut b);
                            a
                        })
                })
            }
        };
        let mut written = vec![false; cells];
        for &(cell, _) in &writes {
            if cell >= cells {
                return Err(Error::Contract(format!(
                    "write to cell {cell} outside 0..{cells}"
                )));
            }
            if std::mem::replace(&mut written[cell], true) {
                return Err(Error::Contract(format!(
                    "cell {cell} written twice in one launch"
                )));
            }
        }
        Ok(writes)
    }

    /// Repeats `step` (one or more launches) until it reports no progress.
    ///
    /// Returns the number of iterations including the final one that made
    /// no progress. More than `bound` iterations is reported as divergence.
    pub fn fixpoint<F>(&self, bound: usize, mut step: F) -> Result<usize>
    where
        F: FnMut() -> Result<bool>,
    {
        let mut iterations = 0;
        loop {
            iterations += 1;
            self.fixpoint_iterations
                .fetch_add(1, AtomicOrdering::Relaxed);
            if iterations > bound {
                return Err(Error::Divergence { bound });
            }
            if !step()? {
                return Ok(iterations);
            }
        }
    }

    /// Minimum of the occupied slots under `cmp`; `None` when every slot is empty.
    ///
    /// `cmp` must be a total order so the result is schedule independent.
    pub fn reduce_min<T, C>(&self, slots: &[Option<T>], cmp: C) -> Option<T>
    where
        T: Copy + Send + Sync,
        C: Fn(&T, &T) -> Ordering + Sync + Send,
    {
        self.launches.fetch_add(1, AtomicOrdering::Relaxed);
        let pick = |a: Option<T>, b: Option<T>| match (a, b) {
            (Some(x), Some(y)) => Some(if cmp(&y, &x) == Ordering::Less { y } else { x }),
            (x, None) => x,
            (None, y) => y,
        };
        match self.schedule {
            Schedule::Parallel => {
                let pool = self.pool.as_ref().expect("parallel engine has a pool");
                pool.install(|| slots.par_iter().copied().reduce(|| None, pick))
            }
            Schedule::Sequential => slots.iter().copied().fold(None, pick),
            Schedule::Shuffled => self
                .permutation(slots.len())
                .into_iter()
                .map(|i| slots[i])
                .fold(None, pick),
        }
    }
}

/// Shared progress flag of a fixpoint kernel.
#[derive(Debug, Default)]
pub struct FixpointFlag(AtomicBool);

impl FixpointFlag {
    pub fn new() -> Self {
        FixpointFlag(AtomicBool::new(false))
    }

    pub fn clear(&self) {
        self.0.store(false, AtomicOrdering::Relaxed);
    }

    pub fn raise(&self) {
        self.0.store(true, AtomicOrdering::Relaxed);
    }

    pub fn is_raised(&self) -> bool {
        self.0.load(AtomicOrdering::Relaxed)
    }
}

/// One atomically swappable 64-bit record.
#[derive(Debug)]
pub struct CasCell(AtomicU64);

impl CasCell {
    pub const EMPTY: u64 = u64::MAX;

    pub fn new(value: u64) -> Self {
        CasCell(AtomicU64::new(value))
    }

    pub fn empty() -> Self {
        Self::new(Self::EMPTY)
    }

    pub fn load(&self) -> u64 {
        self.0.load(AtomicOrdering::Acquire)
    }

    pub fn store(&self, value: u64) {
        self.0.store(value, AtomicOrdering::Release)
    }

    pub fn compare_exchange(&self, current: u64, new: u64) -> std::result::Result<u64, u64> {
        self.0.compare_exchange(
            current,
            new,
            AtomicOrdering::AcqRel,
            AtomicOrdering::Acquire,
        )
    }

    /// Minimum voting: installs `candidate` unless the cell already holds a
    /// value that is not worse. `better(a, b)` is a strict total order.
    /// Returns true when `candidate` was installed.
    pub fn vote_min(&self, candidate: u64, better: impl Fn(u64, u64) -> bool) -> bool {
        loop {
            let current = self.load();
            if current != Self::EMPTY && !better(candidate, current) {
                return false;
            }
            if self.compare_exchange(current, candidate).is_ok() {
                return true;
            }
        }
    }
}
