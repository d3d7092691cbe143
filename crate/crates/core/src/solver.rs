//! One entry point for every algorithm, objective and decomposition mode.

use std::fmt;
use std::str::FromStr;

use crate::alt::{lawler_solve, tree_solve};
use crate::cycle::Cycle;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::graph::{Graph, Objective, Vertex};
use crate::howard::howard_solve;
use crate::howard_par::howard_par_solve;
use crate::oracle::{dp_min_cycle_mean, enumerate_cycle_means};
use crate::scalar::Scalar;
use crate::scc::{solve_decomposed, RegionSolver, SccAlgorithm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    #[default]
    Howard,
    HowardPar,
    Lawler,
    Tree,
    OracleEnum,
    OracleDp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Howard,
        Algorithm::HowardPar,
        Algorithm::Lawler,
        Algorithm::Tree,
        Algorithm::OracleEnum,
        Algorithm::OracleDp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Howard => "howard",
            Algorithm::HowardPar => "howard-par",
            Algorithm::Lawler => "lawler",
            Algorithm::Tree => "tree",
            Algorithm::OracleEnum => "oracle-enum",
            Algorithm::OracleDp => "oracle-dp",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown algorithm {s:?}")))
    }
}

/// How graphs that may not be strongly connected are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SccMode {
    #[default]
    Tarjan,
    Parallel,
    /// Add a heavy Hamiltonian cycle instead of decomposing.
    Off,
}

impl FromStr for SccMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tarjan" => Ok(SccMode::Tarjan),
            "parallel" => Ok(SccMode::Parallel),
            "off" => Ok(SccMode::Off),
            _ => Err(Error::InvalidInput(format!("unknown scc mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions<W> {
    pub algorithm: Algorithm,
    pub objective: Objective,
    /// Decomposition for the policy-iteration solvers; the other algorithms
    /// handle any graph directly and ignore it.
    pub scc: SccMode,
    /// Bracket width for the binary search.
    pub epsilon: W,
}

impl<W: Scalar> SolveOptions<W> {
    pub fn new(algorithm: Algorithm, epsilon: W) -> Self {
        SolveOptions {
            algorithm,
            objective: Objective::Minimize,
            scc: SccMode::Tarjan,
            epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveStats {
    pub outer_iterations: usize,
    pub launches: usize,
    pub fixpoint_iterations: usize,
    pub spf_passes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome<W> {
    /// Optimal cycle mean under the requested objective; `None` when the
    /// graph has no cycle.
    pub mu_star: Option<W>,
    /// Vertices of an optimal cycle, starting at its smallest vertex. The
    /// dynamic-programming oracle reports none.
    pub cycle: Option<Vec<Vertex>>,
    /// Lower end of the final bracket (binary search only).
    pub lower: Option<W>,
    pub stats: SolveStats,
}

/// Solves `g` with the chosen algorithm. Maximization negates the weights,
/// minimizes and negates the result back.
pub fn solve<W: Scalar>(
    g: &Graph<W>,
    opts: &SolveOptions<W>,
    engine: &Engine,
) -> Result<SolveOutcome<W>> {
    let before = engine.stats();
    let mut out = match opts.objective {
        Objective::Minimize => solve_min(g, opts, engine)?,
        Objective::Maximize => {
            let mut r = solve_min(&g.negate_weights(), opts, engine)?;
            r.mu_star = r.mu_star.map(|m| -m);
            r.lower = r.lower.map(|m| -m);
            r
        }
    };
    let after = engine.stats();
    out.stats.launches = after.launches - before.launches;
    out.stats.fixpoint_iterations = after.fixpoint_iterations - before.fixpoint_iterations;
    Ok(out)
}

fn outcome<W: Scalar>(
    g: &Graph<W>,
    cycle: Option<&Cycle<W>>,
    outer_iterations: usize,
) -> SolveOutcome<W> {
    SolveOutcome {
        mu_star: cycle.map(|c| c.record.mean),
        cycle: cycle.map(|c| c.vertices(g)),
        lower: None,
        stats: SolveStats {
            outer_iterations,
            ..Default::default()
        },
    }
}

fn solve_min<W: Scalar>(
    g: &Graph<W>,
    opts: &SolveOptions<W>,
    engine: &Engine,
) -> Result<SolveOutcome<W>> {
    match opts.algorithm {
        Algorithm::Howard | Algorithm::HowardPar => solve_policy_iteration(g, opts, engine),
        Algorithm::Lawler => Ok(match lawler_solve(g, opts.epsilon)? {
            None => outcome(g, None, 0),
            Some(r) => SolveOutcome {
                mu_star: Some(r.upper),
                cycle: Some(r.cycle.vertices(g)),
                lower: Some(r.lower),
                stats: SolveStats {
                    outer_iterations: r.iterations,
                    spf_passes: r.spf_passes,
                    ..Default::default()
                },
            },
        }),
        Algorithm::Tree => Ok(match tree_solve(g)? {
            None => outcome(g, None, 0),
            Some(r) => outcome(g, Some(&r.cycle), r.lambdas.len()),
        }),
        Algorithm::OracleEnum => {
            let best = enumerate_cycle_means(g)?.into_iter().next();
            Ok(SolveOutcome {
                mu_star: best.as_ref().map(|c| c.mean),
                cycle: best.map(|c| c.vertices),
                lower: None,
                stats: SolveStats::default(),
            })
        }
        Algorithm::OracleDp => Ok(SolveOutcome {
            mu_star: dp_min_cycle_mean(g)?,
            cycle: None,
            lower: None,
            stats: SolveStats::default(),
        }),
    }
}

fn solve_policy_iteration<W: Scalar>(
    g: &Graph<W>,
    opts: &SolveOptions<W>,
    engine: &Engine,
) -> Result<SolveOutcome<W>> {
    let region_solver = match opts.algorithm {
        Algorithm::HowardPar => RegionSolver::Parallel,
        _ => RegionSolver::Sequential,
    };
    let scc = match opts.scc {
        SccMode::Tarjan => SccAlgorithm::Tarjan,
        SccMode::Parallel => SccAlgorithm::Parallel,
        SccMode::Off => return solve_hamiltonian(g, region_solver, engine),
    };
    let d = solve_decomposed(g, scc, region_solver, engine)?;
    Ok(outcome(g, d.critical.as_ref(), d.outer_iterations))
}

fn solve_hamiltonian<W: Scalar>(
    g: &Graph<W>,
    solver: RegionSolver,
    engine: &Engine,
) -> Result<SolveOutcome<W>> {
    if g.vertex_count() == 0 {
        return Ok(outcome(g, None, 0));
    }
    let aug = g.augment_hamiltonian(None);
    let (critical, iterations) = match solver {
        RegionSolver::Sequential => {
            let r = howard_solve(&aug)?;
            (r.critical, r.iterations)
        }
        RegionSolver::Parallel => {
            let r = howard_par_solve(&aug, engine)?;
            let c = r
                .critical
                .ok_or_else(|| Error::Internal("augmented graph without cycle".into()))?;
            (c, r.stats.outer_iterations)
        }
    };
    if g.is_hamiltonian_sentinel(critical.record.mean) {
        return Ok(outcome(g, None, iterations));
    }
    // Below the sentinel the critical cycle uses original edges only; vertex
    // ids are shared with the augmented graph.
    Ok(outcome(&aug, Some(&critical), iterations))
}
