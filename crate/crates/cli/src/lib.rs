//! Command line front end: argument surface, graph loading and dispatch.
//! The heavy lifting lives in the `graphbell` library; this crate turns
//! flags into constructions and structs into JSON or CSV text.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use graphbell::error::{Error, Result};
use graphbell::graph::{self, Family, Graph};

pub mod commands;

pub use commands::{cmd_facet, cmd_inequality, cmd_table1, cmd_verify_lc4};

/// What a command produced: the document to print and whether the run
/// counts as a success (verification commands can complete yet fail).
pub struct CommandOutcome {
    pub text: String,
    pub ok: bool,
}

impl CommandOutcome {
    fn ok(text: String) -> CommandOutcome {
        CommandOutcome { text, ok: true }
    }
}

#[derive(Parser)]
#[command(
    name = "graphbell",
    version,
    about = "Bell inequalities built from graph state stabilizers, two settings per party"
)]
pub struct Cli {
    /// Worker threads for exhaustive searches (default: all cores)
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,

    /// Output format; csv applies to table1 only
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    pub format: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Build one Bell inequality and bound it classically and quantumly
    Inequality(InequalityArgs),
    /// Reproduce the violation table for the path, ring and star families
    Table1(Table1Args),
    /// Run the four-qubit cluster verification suite
    VerifyLc4,
    /// Test whether an expression supports a facet of the correlation polytope
    Facet(FacetArgs),
}

/// Where the graph comes from: a file or a named family.
#[derive(Args, Clone)]
pub struct GraphArgs {
    /// Graph file: vertex count on the first line, then one edge "a b" per line
    #[arg(long, value_name = "FILE", conflicts_with_all = ["family", "n", "rows", "cols"])]
    pub graph: Option<PathBuf>,

    /// Named family: LC, RC, ST, FC or GRID
    #[arg(long, value_name = "NAME")]
    pub family: Option<String>,

    /// Vertex count for the named family
    #[arg(long, value_name = "N")]
    pub n: Option<usize>,

    /// Grid rows (GRID family only)
    #[arg(long, value_name = "R", requires = "cols")]
    pub rows: Option<usize>,

    /// Grid columns (GRID family only)
    #[arg(long, value_name = "C", requires = "rows")]
    pub cols: Option<usize>,
}

/// Which inequality to construct on the graph. At most one mode; the
/// default is the smallest guaranteed-violation form for the graph.
#[derive(Args, Clone)]
pub struct BuildArgs {
    #[command(flatten)]
    pub graph: GraphArgs,

    /// Anchored form at vertex -i over the independent neighbour set -I
    #[arg(long)]
    pub theorem1: bool,

    /// Anchored form with the two-observable weighting that lifts the
    /// violation by sqrt(2)
    #[arg(long)]
    pub ardehali: bool,

    /// Anchor vertex for --theorem1 / --ardehali
    #[arg(short = 'i', value_name = "VERTEX")]
    pub anchor: Option<usize>,

    /// Independent neighbour set for --theorem1 / --ardehali
    #[arg(short = 'I', value_name = "V,V,...", value_delimiter = ',')]
    pub set: Option<Vec<usize>>,

    /// Three-term form on a triangle of mutually adjacent vertices
    #[arg(long, value_name = "A,B,C", value_delimiter = ',')]
    pub triangle: Option<Vec<usize>>,

    /// Standard composite for the named family (requires --family)
    #[arg(long)]
    pub composite: bool,

    /// Greedy block composite on the given graph
    #[arg(long)]
    pub blocks: bool,
}

#[derive(Args)]
pub struct InequalityArgs {
    #[command(flatten)]
    pub build: BuildArgs,

    /// Restrict the classical search with the stabilizer sign structure
    #[arg(long)]
    pub lemma1: bool,

    /// Cross-check the quantum value against the dense backend
    #[arg(long)]
    pub dense_verify: bool,
}

#[derive(Args)]
pub struct Table1Args {
    /// Largest vertex count to tabulate, between 3 and 12
    #[arg(long, default_value_t = 12, value_name = "N")]
    pub max_n: usize,
}

#[derive(Args)]
pub struct FacetArgs {
    /// Abstract setting pattern instead of a graph construction
    #[arg(long, value_parser = ["mermin", "ardehali", "chsh", "single"])]
    pub pattern: Option<String>,

    /// Party count for --pattern mermin / ardehali / single
    #[arg(short = 'm', long, value_name = "M")]
    pub m: Option<usize>,

    #[command(flatten)]
    pub build: BuildArgs,
}

/// Table output format. Everything else is JSON only.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

pub fn run(cli: &Cli) -> Result<CommandOutcome> {
    match &cli.command {
        Command::Inequality(args) => {
            reject_csv(cli.format.as_deref())?;
            cmd_inequality(args)
        }
        Command::Table1(args) => {
            let format = match cli.format.as_deref() {
                Some("json") => TableFormat::Json,
                _ => TableFormat::Csv,
            };
            cmd_table1(args.max_n, format)
        }
        Command::VerifyLc4 => {
            reject_csv(cli.format.as_deref())?;
            cmd_verify_lc4()
        }
        Command::Facet(args) => {
            reject_csv(cli.format.as_deref())?;
            cmd_facet(args)
        }
    }
}

fn reject_csv(format: Option<&str>) -> Result<()> {
    if format == Some("csv") {
        return Err(Error::Construction(
            "csv output is only available for table1".into(),
        ));
    }
    Ok(())
}

/// Installs the global rayon pool. A second call in the same process is a
/// no-op, which is what test harnesses need.
pub fn configure_workers(workers: Option<usize>) {
    if let Some(workers) = workers {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
}

pub(crate) fn load_graph(args: &GraphArgs) -> Result<Graph> {
    if let Some(path) = &args.graph {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Construction(format!("cannot read {}: {e}", path.display())))?;
        return graph::parse_graph(&text);
    }
    let name = args
        .family
        .as_deref()
        .ok_or_else(|| Error::Construction("need either --graph FILE or --family NAME".into()))?;
    let family: Family = name.parse()?;
    let dims = args.rows.zip(args.cols);
    let n = match (args.n, dims) {
        (Some(n), Some((rows, cols))) if n != rows * cols => {
            return Err(Error::Construction(format!(
                "--n {n} disagrees with --rows {rows} --cols {cols}"
            )));
        }
        (Some(n), _) => n,
        (None, Some((rows, cols))) => rows * cols,
        (None, None) => {
            return Err(Error::Construction(format!(
                "--family {name} needs --n (or --rows/--cols for GRID)"
            )));
        }
    };
    graph::family(family, n, dims)
}
