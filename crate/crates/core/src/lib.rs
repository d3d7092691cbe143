//! Optimal cycle mean solvers for weighted digraphs.
//!
//! All algorithms are generic over the [`Scalar`] type. Use [`Rational`]
//! for integer weights (exact results) and `f64` otherwise.
//!
//! ```
//! use ocm_core::{solve, Algorithm, Engine, Graph, Rational, SolveOptions};
//!
//! let w = Rational::from_integer;
//! let g = Graph::from_edges(2, &[(0, 1, w(2)), (1, 0, w(4))]).unwrap();
//! let opts = SolveOptions::new(Algorithm::Howard, Rational::new(1, 1_000_000));
//! let out = solve(&g, &opts, &Engine::sequential()).unwrap();
//! assert_eq!(out.mu_star, Some(w(3)));
//! ```

pub mod alt;
pub mod cycle;
pub mod engine;
pub mod error;
pub mod graph;
pub mod howard;
pub mod howard_par;
pub mod io;
pub mod modelgen;
pub mod oracle;
pub mod policy;
pub mod scalar;
pub mod scc;
pub mod solver;
pub mod spf;

pub use cycle::{select_min_cycle, Cycle, CycleRecord};
pub use engine::{CasCell, Engine, EngineConfig, EngineStats, FixpointFlag, Schedule};
pub use error::{Error, Result};
pub use graph::{EdgeId, Graph, Objective, Vertex, NIL};
pub use scalar::Scalar;
pub use solver::{solve, Algorithm, SccMode, SolveOptions, SolveOutcome, SolveStats};

/// Exact scalar used in integer-exact mode.
pub type Rational = num_rational::Ratio<i128>;

pub type ExactGraph = Graph<Rational>;
pub type FloatGraph = Graph<f64>;
