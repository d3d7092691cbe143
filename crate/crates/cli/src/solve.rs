use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use ocm_core::io::{parse_graph, EdgeList};
use ocm_core::{
    solve, Algorithm, Engine, Graph, Objective, Rational, Scalar, SccMode, SolveOptions,
};
use serde::Serialize;

use crate::{parse_exact_decimal, EngineArgs, ObjectiveArg, ScalarArg};

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Graph file, DIMACS style or plain edge list.
    pub file: PathBuf,
    /// howard, howard-par, lawler, tree, oracle-enum or oracle-dp.
    #[arg(long, default_value = "howard")]
    pub algo: Algorithm,
    /// Defaults to the objective recorded in the file header, else min.
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    /// tarjan, parallel or off.
    #[arg(long, default_value = "tarjan")]
    pub scc: SccMode,
    /// Bracket width for lawler.
    #[arg(long, default_value = "1e-9")]
    pub epsilon: String,
    #[arg(long, value_enum, default_value = "auto")]
    pub scalar: ScalarArg,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Also print the vertices of an optimal cycle.
    #[arg(long)]
    pub cycle: bool,
    /// Print a JSON report instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReportStats {
    pub outer_iterations: usize,
    pub launches: usize,
    pub fixpoint_iterations: usize,
    pub spf_passes: usize,
}

/// Result of one solve. Wall time is kept out of the JSON so that repeated
/// runs serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub graph: String,
    pub vertices: usize,
    pub edges: usize,
    pub algorithm: String,
    pub objective: String,
    pub scc: String,
    pub scalar: String,
    pub schedule: String,
    pub mu_star: Option<String>,
    pub cycle: Option<Vec<usize>>,
    pub lower: Option<String>,
    pub stats: ReportStats,
    #[serde(skip)]
    pub wall_ms: f64,
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self, with_cycle: bool) -> String {
        let mut s = match &self.mu_star {
            Some(m) => format!("mu_star = {m}\n"),
            None => "no cycle\n".to_string(),
        };
        if let (true, Some(c)) = (with_cycle, &self.cycle) {
            let vs: Vec<String> = c.iter().map(usize::to_string).collect();
            s += &format!("cycle = {}\n", vs.join(" "));
        }
        if let Some(l) = &self.lower {
            s += &format!("lower = {l}\n");
        }
        s += &format!("iterations = {}\n", self.stats.outer_iterations);
        s += &format!("time_ms = {:.3}\n", self.wall_ms);
        s
    }
}

/// Objective recorded by `ocm gen` in the comment header.
pub fn header_objective(text: &str) -> Option<Objective> {
    text.lines()
        .map(str::trim_start)
        .take_while(|l| {
            l.starts_with('#') || l.starts_with("c ") || l.starts_with("p ") || l.is_empty()
        })
        .find_map(|l| match l.trim_start_matches(['#', 'c', ' ']) {
            "objective max" => Some(Objective::Maximize),
            "objective min" => Some(Objective::Minimize),
            _ => None,
        })
}

fn scc_name(scc: SccMode) -> &'static str {
    match scc {
        SccMode::Tarjan => "tarjan",
        SccMode::Parallel => "parallel",
        SccMode::Off => "off",
    }
}

/// Solves an already parsed graph with the scalar type chosen by `args`.
pub fn solve_edge_list(
    name: &str,
    el: &EdgeList,
    objective: Objective,
    args: &SolveArgs,
) -> Result<SolveReport> {
    let engine = args.engine.engine()?;
    match args.scalar {
        ScalarArg::Auto if el.all_integral() => {
            let eps = parse_exact_decimal(&args.epsilon).context("--epsilon")?;
            solve_typed::<Rational>(name, el.to_graph()?, eps, "exact", objective, args, &engine)
        }
        ScalarArg::Auto | ScalarArg::F64 => {
            let eps = args.epsilon.parse().context("--epsilon")?;
            solve_typed::<f64>(name, el.to_graph()?, eps, "f64", objective, args, &engine)
        }
        ScalarArg::F32 => {
            let eps = args.epsilon.parse().context("--epsilon")?;
            solve_typed::<f32>(name, el.to_graph()?, eps, "f32", objective, args, &engine)
        }
    }
}

fn solve_typed<W: Scalar>(
    name: &str,
    g: Graph<W>,
    epsilon: W,
    scalar: &str,
    objective: Objective,
    args: &SolveArgs,
    engine: &Engine,
) -> Result<SolveReport> {
    let opts = SolveOptions {
        algorithm: args.algo,
        objective,
        scc: args.scc,
        epsilon,
    };
    let start = Instant::now();
    let out = solve(&g, &opts, engine)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(SolveReport {
        graph: name.to_string(),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        algorithm: args.algo.name().to_string(),
        objective: match objective {
            Objective::Minimize => "min",
            Objective::Maximize => "max",
        }
        .to_string(),
        scc: scc_name(args.scc).to_string(),
        scalar: scalar.to_string(),
        schedule: format!("{:?}", args.engine.schedule).to_lowercase(),
        mu_star: out.mu_star.map(|m| m.render()),
        cycle: out.cycle,
        lower: out.lower.map(|m| m.render()),
        stats: ReportStats {
            outer_iterations: out.stats.outer_iterations,
            launches: out.stats.launches,
            fixpoint_iterations: out.stats.fixpoint_iterations,
            spf_passes: out.stats.spf_passes,
        },
        wall_ms,
    })
}

pub fn solve_file(args: &SolveArgs) -> Result<SolveReport> {
    let text = std::fs::read_to_string(&args.file)
        .with_context(|| format!("cannot read {}", args.file.display()))?;
    let el = parse_graph(&text).with_context(|| format!("{}", args.file.display()))?;
    let objective = match args.objective {
        Some(ObjectiveArg::Min) => Objective::Minimize,
        Some(ObjectiveArg::Max) => Objective::Maximize,
        None => header_objective(&text).unwrap_or(Objective::Minimize),
    };
    solve_edge_list(&args.file.display().to_string(), &el, objective, args)
}

pub fn run(args: &SolveArgs, out: &mut dyn Write) -> Result<()> {
    let report = solve_file(args)?;
    if args.json {
        writeln!(out, "{}", report.to_json())?;
    } else {
        write!(out, "{}", report.to_text(args.cycle))?;
    }
    Ok(())
}
