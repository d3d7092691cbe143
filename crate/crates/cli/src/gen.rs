use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use ocm_core::io::write_edge_list;
use ocm_core::modelgen::{
    generate_state_space, scale_to, StateSpace, SystemTemplate, TemplateKind, DEFAULT_STATE_CAP,
};
use ocm_core::{Objective, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TemplateArg {
    ServerFree,
    Server,
}

impl From<TemplateArg> for TemplateKind {
    fn from(t: TemplateArg) -> Self {
        match t {
            TemplateArg::ServerFree => TemplateKind::ServerFree,
            TemplateArg::Server => TemplateKind::WithServer,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub template: TemplateArg,
    /// Editor and viewer client counts.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub clients: Vec<usize>,
    /// Add editors until the model has at least this many vertices.
    #[arg(long)]
    pub min_vertices: Option<usize>,
    /// Add editors until the model has at least this many edges.
    #[arg(long)]
    pub min_edges: Option<usize>,
    /// Abort when more states than this are discovered.
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    pub cap: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Generates the model described by `args`, scaling the editor count when a
/// minimum size is requested.
pub fn generate(args: &GenArgs) -> Result<(SystemTemplate, StateSpace)> {
    let kind = args.template.into();
    if args.min_vertices.is_some() || args.min_edges.is_some() {
        let viewers = args.clients.get(1).copied().unwrap_or(0);
        return Ok(scale_to(
            kind,
            viewers,
            args.min_vertices.unwrap_or(0),
            args.min_edges.unwrap_or(0),
            args.cap,
        )?);
    }
    let t = SystemTemplate::builtin(kind, &args.clients)?;
    let space = generate_state_space(&t, args.cap)?;
    Ok((t, space))
}

/// Edge-list text with a header recording the template and objective.
pub fn render(t: &SystemTemplate, space: &StateSpace) -> Result<String> {
    let objective = match space.objective {
        Objective::Minimize => "objective min",
        Objective::Maximize => "objective max",
    };
    let header = vec![
        t.describe(),
        objective.to_string(),
        format!(
            "vertices {} edges {}",
            space.vertex_count,
            space.edges.len()
        ),
    ];
    Ok(write_edge_list(&space.to_graph::<Rational>()?, &header))
}

pub fn run(args: &GenArgs, out: &mut dyn Write) -> Result<()> {
    let (t, space) = generate(args)?;
    let text = render(&t, &space)?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, text)
                .with_context(|| format!("cannot write {}", path.display()))?;
            writeln!(
                out,
                "{}: {} vertices, {} edges ({})",
                path.display(),
                space.vertex_count,
                space.edges.len(),
                t.describe()
            )?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}
