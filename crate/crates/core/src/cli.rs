//! Command line front end. [`run`] is the whole program minus process setup,
//! so it can be driven from tests with in-memory writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::aesc::{self, AescConfig, DEFAULT_EXACT_LIMIT, DEFAULT_TAU_MAX};
use crate::bench::{self, BenchConfig, Experiment};
use crate::graph::{generators, Graph, VertexId};
use crate::rng::{self, HashSpec, SelectorKind, StreamCampaign};
use crate::walker::{CampaignConfig, WalkerMode, DEFAULT_LANES};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 0x5eed_5eed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bouquets", version, about = "Spanning edge centrality with lane-batched random walks")]
struct Cli {
    /// More log output on standard error (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Approximate the spanning centrality of every edge.
    Aesc(AescArgs),
    /// Exact spanning centrality via the Laplacian pseudoinverse (small graphs).
    Exact(ExactArgs),
    /// Time walk campaigns or AESC runs over a parameter grid.
    Bench(BenchArgs),
    /// Write the raw selection words of a walk campaign as little-endian u32.
    RngDump(RngDumpArgs),
    /// Graph statistics, decay estimate and bouquet branching summary.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
struct AescArgs {
    /// SNAP-style edge list.
    #[arg(long)]
    graph: PathBuf,
    /// Absolute error bound per edge.
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Failure probability.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Power-iteration steps for the decay estimate.
    #[arg(long, default_value_t = 100)]
    omega: usize,
    /// Candidate-node count (recorded only).
    #[arg(long, default_value_t = 0)]
    gamma: usize,
    /// Walk generation strategy: naive, vector-mod, hash or saba.
    #[arg(long, default_value = "saba")]
    mode: WalkerMode,
    /// Neighbor selector override: naive, xor or scaled.
    #[arg(long)]
    selector: Option<SelectorKind>,
    /// Walks per bouquet.
    #[arg(long, default_value_t = DEFAULT_LANES)]
    lanes: usize,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output TSV (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Upper bound on truncation lengths.
    #[arg(long, default_value_t = DEFAULT_TAU_MAX)]
    tau_max: u32,
    /// Truncate each edge at its own length instead of one graph-wide length.
    #[arg(long)]
    per_edge_tau: bool,
    /// Cap on the exact propagation depth per source.
    #[arg(long)]
    max_depth: Option<u32>,
}

#[derive(Debug, Args)]
struct ExactArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest vertex count accepted.
    #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
    limit: usize,
    /// Accepted for uniformity; the exact route uses no randomness.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    graph: PathBuf,
    /// synthetic (walk campaigns) or aesc.
    #[arg(long, default_value = "synthetic")]
    experiment: Experiment,
    /// Comma-separated walker modes.
    #[arg(long, value_delimiter = ',', default_value = "naive,vector-mod,hash,saba")]
    mode: Vec<WalkerMode>,
    /// Comma-separated walks per vertex.
    #[arg(long, value_delimiter = ',', default_value = "2048")]
    walks: Vec<usize>,
    /// Comma-separated walk lengths (vertices per walk).
    #[arg(long, value_delimiter = ',', default_value = "10")]
    length: Vec<usize>,
    /// Comma-separated error bounds (aesc experiment).
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    epsilon: Vec<f64>,
    /// Comma-separated thread counts (default: all cores).
    #[arg(long, value_delimiter = ',')]
    threads: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_LANES)]
    lanes: usize,
    #[arg(long)]
    selector: Option<SelectorKind>,
    /// Timed repetitions per point (at least 3; the median is reported).
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Also write the RESULT lines to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RngDumpArgs {
    #[arg(long, default_value = "scaled")]
    selector: SelectorKind,
    /// Walks per start vertex.
    #[arg(long, default_value_t = 100)]
    walks: usize,
    /// Vertices per walk; each walk emits length - 1 words.
    #[arg(long, default_value_t = 5)]
    length: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Edge list to walk on (default: a built-in 4-vertex graph, from vertex 0 only).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Comma-separated start vertices, as input ids (default: every vertex).
    #[arg(long, value_delimiter = ',')]
    start: Vec<u64>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 100)]
    omega: usize,
    /// Walk mode for the branching summary (batched modes only).
    #[arg(long, default_value = "saba")]
    mode: WalkerMode,
    #[arg(long, default_value_t = 256)]
    walks: usize,
    #[arg(long, default_value_t = 10)]
    length: usize,
    #[arg(long, default_value_t = DEFAULT_LANES)]
    lanes: usize,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

fn all_cores() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs the program on `args` (including the program name) and returns the
/// exit code. Results go to `out`, run metadata and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match cli.verbose {
        0 => {}
        1 => log::set_max_level(log::LevelFilter::Info),
        2 => log::set_max_level(log::LevelFilter::Debug),
        _ => log::set_max_level(log::LevelFilter::Trace),
    }
    let _ = writeln!(err, "bouquets {}", env!("CARGO_PKG_VERSION"));
    let result = match cli.command {
        Command::Aesc(a) => cmd_aesc(a, out, err),
        Command::Exact(a) => cmd_exact(a, out, err),
        Command::Bench(a) => cmd_bench(a, out, err),
        Command::RngDump(a) => cmd_rng_dump(a, out, err),
        Command::Stats(a) => cmd_stats(a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Config(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            }
        }
    }
}

fn load(path: &Path, err: &mut dyn Write) -> Result<Graph> {
    let g = Graph::load_path(path)?;
    let _ = writeln!(
        err,
        "graph: {} ({} vertices, {} edges, max degree {})",
        path.display(),
        g.n(),
        g.m(),
        g.max_degree()
    );
    Ok(g)
}

/// `%g`-style rendering with 6 significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `u<TAB>v<TAB>value` per edge, input ids with `u < v`, ascending.
pub fn write_edge_values(g: &Graph, values: &[f64], out: &mut dyn Write) -> io::Result<()> {
    let mut rows: Vec<(u64, u64, f64)> = g
        .edges()
        .iter()
        .zip(values)
        .map(|(&(u, v), &x)| {
            let (a, b) = (g.label(u), g.label(v));
            (a.min(b), a.max(b), x)
        })
        .collect();
    rows.sort_by_key(|r| (r.0, r.1));
    let mut w = BufWriter::new(out);
    for (u, v, x) in rows {
        writeln!(w, "{u}\t{v}\t{}", format_sig6(x))?;
    }
    w.flush()
}

fn write_output(path: Option<&Path>, out: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = File::create(p)?;
            body(&mut f)?;
            f.sync_all()?;
        }
        None => body(out)?,
    }
    Ok(())
}

fn cmd_aesc(a: AescArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let config = AescConfig {
        epsilon: a.epsilon,
        delta: a.delta,
        omega: a.omega,
        gamma: a.gamma,
        mode: a.mode,
        selector: a.selector,
        lanes: a.lanes,
        master_seed: a.seed,
        threads: a.threads.unwrap_or_else(all_cores),
        tau_max: a.tau_max,
        per_edge_tau: a.per_edge_tau,
        max_traversal_depth: a.max_depth,
        hash: HashSpec::default(),
    };
    config.validate()?;
    let _ = writeln!(err, "config: {config:?}");
    let g = load(&a.graph, err)?;
    let est = aesc::aesc(&g, &config)?;
    let _ = writeln!(
        err,
        "lambda_hat: {:.6} tau: {} fallback: {} walks: {} walk_steps: {} seconds: {:.3}",
        est.plan.lambda_hat,
        est.plan.max_tau(),
        est.plan.fallback,
        est.walks,
        est.walk_steps,
        est.seconds
    );
    write_output(a.out.as_deref(), out, |w| write_edge_values(&g, &est.s_hat, w))
}

fn cmd_exact(a: ExactArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let _ = writeln!(err, "config: exact limit={} seed={}", a.limit, a.seed);
    let g = load(&a.graph, err)?;
    let sc = aesc::exact_sc_with_limit(&g, a.limit)?;
    write_output(a.out.as_deref(), out, |w| write_edge_values(&g, &sc, w))
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let config = BenchConfig {
        graph: a.graph,
        experiment: a.experiment,
        modes: a.mode,
        walks_per_vertex: a.walks,
        lengths: a.length,
        epsilons: a.epsilon,
        threads: if a.threads.is_empty() { vec![all_cores()] } else { a.threads },
        lanes: a.lanes,
        selector: a.selector,
        repetitions: a.reps.max(3),
        master_seed: a.seed,
        hash: HashSpec::default(),
    };
    let _ = writeln!(err, "config: {config:?}");
    let report = bench::run_benchmark(&config)?;
    out.write_all(report.to_text().as_bytes())?;
    out.write_all(report.result_lines().as_bytes())?;
    if let Some(path) = a.report {
        std::fs::write(path, report.result_lines())?;
    }
    Ok(())
}

fn cmd_rng_dump(a: RngDumpArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let (g, starts) = match &a.graph {
        Some(path) => {
            let g = load(path, err)?;
            let starts = if a.start.is_empty() {
                None
            } else {
                Some(resolve_labels(&g, &a.start)?)
            };
            (g, starts)
        }
        None => {
            let g = generators::diamond();
            let starts = if a.start.is_empty() {
                vec![0]
            } else {
                resolve_labels(&g, &a.start)?
            };
            (g, Some(starts))
        }
    };
    let campaign = StreamCampaign {
        starts,
        walks_per_vertex: a.walks,
        length: a.length,
        selector: a.selector,
        master_seed: a.seed,
        hash: HashSpec::default(),
    };
    let _ = writeln!(err, "config: {campaign:?}");
    let mut w = BufWriter::with_capacity(1 << 16, out);
    match rng::rng_stream(&g, &campaign, &mut w) {
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(e),
        Ok(words) => {
            let _ = writeln!(err, "words: {words}");
            Ok(())
        }
    }
}

fn resolve_labels(g: &Graph, labels: &[u64]) -> Result<Vec<VertexId>> {
    labels
        .iter()
        .map(|&l| {
            (0..g.n() as VertexId)
                .find(|&v| g.label(v) == l)
                .ok_or_else(|| Error::config(format!("start vertex {l} is not in the graph")))
        })
        .collect()
}

fn cmd_stats(a: StatsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let g = load(&a.graph, err)?;
    let mut degrees: Vec<usize> = (0..g.n() as VertexId).map(|u| g.degree(u)).collect();
    degrees.sort_unstable();
    let components = g.component_count();
    writeln!(out, "vertices\t{}", g.n())?;
    writeln!(out, "edges\t{}", g.m())?;
    writeln!(out, "components\t{components}")?;
    writeln!(out, "bipartite\t{}", g.bipartition().is_some())?;
    if let (Some(&min), Some(&max)) = (degrees.first(), degrees.last()) {
        writeln!(out, "degree_min\t{min}")?;
        writeln!(out, "degree_median\t{}", degrees[degrees.len() / 2])?;
        writeln!(out, "degree_max\t{max}")?;
        writeln!(out, "degree_mean\t{}", format_sig6(2.0 * g.m() as f64 / g.n() as f64))?;
    }
    if components == 1 && g.m() > 0 {
        let plan = aesc::truncated_lengths(&g, a.epsilon, a.omega, DEFAULT_TAU_MAX, false)?;
        writeln!(out, "lambda_hat\t{}", format_sig6(plan.lambda_hat))?;
        writeln!(out, "tau\t{}", plan.max_tau())?;
    }
    if a.mode.is_batched() && g.m() > 0 && a.length > 1 {
        let campaign = CampaignConfig {
            walks_per_vertex: a.walks,
            length: a.length,
            mode: a.mode,
            selector: None,
            lanes: a.lanes,
            threads: a.threads.unwrap_or_else(all_cores),
            master_seed: a.seed,
            hash: HashSpec::default(),
            collect_branching: true,
        };
        match bench::campaign_branching(&g, &campaign) {
            Ok(b) => {
                writeln!(out, "branch_mode\t{}", a.mode)?;
                writeln!(out, "branch_p1\t{}", b.p1)?;
                writeln!(out, "branch_p10\t{}", b.p10)?;
                writeln!(out, "branch_p25\t{}", b.p25)?;
                writeln!(out, "branch_mean\t{}", format_sig6(b.mean))?;
                if let Some(beta) = b.beta_hat {
                    writeln!(out, "beta_hat\t{}", format_sig6(beta))?;
                }
            }
            Err(Error::IsolatedVertex(v)) => {
                let _ = writeln!(err, "branching skipped: vertex {} is isolated", g.label(v));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
