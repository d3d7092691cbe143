use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use ocm_core::io::{parse_graph, EdgeList, Format, RawWeight};
use ocm_core::modelgen::{generate_state_space, SystemTemplate, DEFAULT_STATE_CAP};
use ocm_core::{Algorithm, Objective, SccMode};

use crate::gen::TemplateArg;
use crate::solve::{header_objective, solve_edge_list, SolveArgs, SolveReport};
use crate::{EngineArgs, ObjectiveArg, ScalarArg};

pub const CSV_HEADER: &str = "graph,n,m,n*m,algo,mu_star,wall_ms,outer_iters,launches,spf_passes";

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Graph files to include.
    pub files: Vec<PathBuf>,
    /// Template for `--sweep` entries.
    #[arg(long, value_enum, default_value = "server-free")]
    pub template: TemplateArg,
    /// Client counts of one generated instance, e.g. `3,1`. Repeatable.
    #[arg(long)]
    pub sweep: Vec<String>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "howard,howard-par,lawler"
    )]
    pub algo: Vec<Algorithm>,
    /// Defaults to the objective recorded with each graph, else min.
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    #[arg(long, default_value = "tarjan")]
    pub scc: SccMode,
    #[arg(long, default_value = "1e-9")]
    pub epsilon: String,
    /// Timed runs per row; the median wall time is reported.
    #[arg(long, default_value_t = 10)]
    pub repeat: usize,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// CSV output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A benchmark input with its display name and default objective.
pub struct BenchGraph {
    pub name: String,
    pub edges: EdgeList,
    pub objective: Option<Objective>,
}

/// Median of `xs`; the mean of the two middle values for even lengths.
pub fn median(xs: &mut [f64]) -> f64 {
    assert!(!xs.is_empty(), "median of no samples");
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / 2.0
    }
}

fn load_inputs(args: &BenchArgs) -> Result<Vec<BenchGraph>> {
    let mut graphs = Vec::new();
    for path in &args.files {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let edges = parse_graph(&text).with_context(|| format!("{}", path.display()))?;
        graphs.push(BenchGraph {
            name: path.display().to_string(),
            edges,
            objective: header_objective(&text),
        });
    }
    for spec in &args.sweep {
        let counts = spec
            .split(',')
            .map(|c| c.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("bad --sweep entry {spec:?}"))?;
        let t = SystemTemplate::builtin(args.template.into(), &counts)?;
        let space = generate_state_space(&t, DEFAULT_STATE_CAP)?;
        let name = format!(
            "{}:{}",
            t.kind.name(),
            counts
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join("+")
        );
        let edges = EdgeList {
            n: space.vertex_count,
            edges: space
                .edges
                .iter()
                .map(|&(u, v, c)| (u, v, RawWeight::Int(c)))
                .collect(),
            format: Format::EdgeList,
        };
        graphs.push(BenchGraph {
            name,
            edges,
            objective: Some(space.objective),
        });
    }
    if graphs.is_empty() {
        bail!("nothing to benchmark: pass graph files or --sweep");
    }
    Ok(graphs)
}

/// Runs `algo` on `g` `repeat` times and returns the report of the last run
/// with its wall time replaced by the median.
pub fn measure(g: &BenchGraph, algo: Algorithm, args: &BenchArgs) -> Result<SolveReport> {
    let objective = match args.objective {
        Some(ObjectiveArg::Min) => Objective::Minimize,
        Some(ObjectiveArg::Max) => Objective::Maximize,
        None => g.objective.unwrap_or_default(),
    };
    let solve_args = SolveArgs {
        file: PathBuf::from(&g.name),
        algo,
        objective: None,
        scc: args.scc,
        epsilon: args.epsilon.clone(),
        scalar: ScalarArg::Auto,
        engine: args.engine.clone(),
        cycle: false,
        json: false,
    };
    let mut times = Vec::with_capacity(args.repeat);
    let mut last = None;
    for _ in 0..args.repeat.max(1) {
        let report = solve_edge_list(&g.name, &g.edges, objective, &solve_args)?;
        times.push(report.wall_ms);
        last = Some(report);
    }
    let mut report = last.expect("at least one run");
    report.wall_ms = median(&mut times);
    Ok(report)
}

pub fn csv_row(r: &SolveReport) -> String {
    format!(
        "{},{},{},{},{},{},{:.3},{},{},{}",
        r.graph,
        r.vertices,
        r.edges,
        r.vertices as u128 * r.edges as u128,
        r.algorithm,
        r.mu_star.as_deref().unwrap_or("none"),
        r.wall_ms,
        r.stats.outer_iterations,
        r.stats.launches,
        r.stats.spf_passes
    )
}

pub fn run(args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let graphs = load_inputs(args)?;
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for g in &graphs {
        for &algo in &args.algo {
            csv += &csv_row(&measure(g, algo, args)?);
            csv.push('\n');
        }
    }
    match &args.out {
        Some(path) => {
            std::fs::write(path, csv).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}
