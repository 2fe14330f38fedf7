mod experiment;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use geomca::pointset::write_gcpc;
use geomca::{
    estimate_epsilon, evaluate, ipr, load_pointset, sparsify, EpsilonEstimate, FileFormat,
    GeomcaError, GeomcaParams, GraphOptions, PointSet, ReportOptions, SetLabel, DEFAULT_MAX_EDGES,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "geomca", version, about = "Geometric component analysis of two point sets")]
struct Cli {
    /// Worker threads for distance computations (defaults to all cores).
    #[arg(long, global = true, env = "GEOMCA_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate epsilon as a percentile of sampled reference distances.
    EstimateEps(EstimateArgs),
    /// Score an evaluation set against a reference set.
    Evaluate(EvaluateArgs),
    /// Thin a point set so that kept points are more than delta apart.
    Sparsify(SparsifyArgs),
    /// Run a synthetic experiment and write JSON and CSV results.
    #[command(subcommand)]
    Experiment(experiment::Experiment),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Gcpc,
}

fn resolve_format(path: &Path, format: Option<Format>) -> FileFormat {
    match format {
        Some(Format::Csv) => FileFormat::Csv,
        Some(Format::Gcpc) => FileFormat::GcpcBinary,
        None => match path.extension().and_then(|e| e.to_str()) {
            Some("gcpc" | "bin") => FileFormat::GcpcBinary,
            _ => FileFormat::Csv,
        },
    }
}

fn load(path: &Path, format: Option<Format>, label: SetLabel) -> geomca::Result<PointSet> {
    load_pointset(path, resolve_format(path, format), label)
}

#[derive(Args)]
struct EstimateArgs {
    /// Reference point set.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long)]
    format: Option<Format>,
    /// Percentile of the sampled distances, in (0, 100].
    #[arg(long, default_value_t = 10.0)]
    p: f64,
    /// Sample size; 2k points are drawn and k^2 distances taken.
    #[arg(long, default_value_t = 1000)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    epsilon: f64,
    p: f64,
    k: usize,
    seed: u64,
    num_distances: usize,
    sampler: &'a str,
}

impl<'a> From<&'a EpsilonEstimate> for EstimateOutput<'a> {
    fn from(e: &'a EpsilonEstimate) -> Self {
        Self {
            epsilon: e.epsilon,
            p: e.percentile,
            k: e.sample_size,
            seed: e.seed,
            num_distances: e.num_distances,
            sampler: &e.sampler,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    Ipr,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("eps").required(true).args(["epsilon", "p"]))]
#[command(group = clap::ArgGroup::new("sparse").args(["delta", "delta_factor"]))]
struct EvaluateArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long = "eval")]
    evaluation: PathBuf,
    #[arg(long)]
    format: Option<Format>,
    /// Explicit graph threshold.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Estimate epsilon at this percentile instead.
    #[arg(long)]
    p: Option<f64>,
    /// Sample size for the epsilon estimate.
    #[arg(long, default_value_t = 1000)]
    eps_k: usize,
    /// Seed for the epsilon estimate and the baseline's balancing.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Absolute sparsification distance.
    #[arg(long)]
    delta: Option<f64>,
    /// Sparsification distance as a multiple of epsilon, in (0, 1].
    #[arg(long)]
    delta_factor: Option<f64>,
    #[arg(long, default_value_t = 0.75)]
    eta_c: f64,
    #[arg(long, default_value_t = 0.45)]
    eta_q: f64,
    #[arg(long)]
    baseline: Option<Baseline>,
    /// Neighbourhood size for the baseline.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include component member ids in the report.
    #[arg(long)]
    members: bool,
    /// Write the edge list as JSON lines to this path.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Abort when more edges than this would be stored.
    #[arg(long, default_value_t = DEFAULT_MAX_EDGES)]
    max_edges: usize,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("radius").required(true).args(["delta", "delta_factor"]))]
struct SparsifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    delta: Option<f64>,
    /// Delta as a multiple of `--epsilon`.
    #[arg(long, requires = "epsilon")]
    delta_factor: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the kept points in GCPC format.
    #[arg(long)]
    write_gcpc: Option<PathBuf>,
}

#[derive(Serialize)]
struct SparsifyOutput<'a> {
    n: usize,
    delta: f64,
    order: &'a str,
    kept: &'a [usize],
    cover: &'a std::collections::BTreeMap<usize, usize>,
}

/// A configuration error found after argument parsing.
#[derive(Debug)]
pub(crate) struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn write_output(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn delta_from(delta: Option<f64>, factor: Option<f64>, epsilon: f64) -> anyhow::Result<Option<f64>> {
    if let Some(f) = factor {
        if !(f > 0.0 && f <= 1.0) {
            return Err(usage(format!("--delta-factor must lie in (0, 1], got {f}")));
        }
        return Ok(Some(f * epsilon));
    }
    if let Some(d) = delta {
        if d > epsilon {
            eprintln!("warning: delta {d} exceeds epsilon {epsilon}");
        }
    }
    Ok(delta)
}

fn cmd_estimate(args: &EstimateArgs) -> anyhow::Result<()> {
    let r = load(&args.reference, args.format, SetLabel::Reference)?;
    let est = estimate_epsilon(&r, args.p, args.k, args.seed)?;
    let json = serde_json::to_string_pretty(&EstimateOutput::from(&est))?;
    write_output(args.out.as_deref(), &json)
}

fn cmd_evaluate(args: &EvaluateArgs) -> anyhow::Result<()> {
    let r = load(&args.reference, args.format, SetLabel::Reference)?;
    let e = load(&args.evaluation, args.format, SetLabel::Evaluation)?;
    let estimate = match (args.epsilon, args.p) {
        (Some(_), _) => None,
        (None, Some(p)) => Some(estimate_epsilon(&r, p, args.eps_k, args.seed)?),
        (None, None) => return Err(usage("one of --epsilon or --p is required")),
    };
    let epsilon = estimate.as_ref().map_or_else(|| args.epsilon.unwrap(), |est| est.epsilon);
    let params = GeomcaParams {
        epsilon,
        delta: delta_from(args.delta, args.delta_factor, epsilon)?,
        eta_c: args.eta_c,
        eta_q: args.eta_q,
    };
    let baseline = match args.baseline {
        Some(Baseline::Ipr) => Some(ipr(&r, &e, args.k, args.seed)?),
        None => None,
    };
    let opts = GraphOptions {
        keep_edges: args.edges.is_some(),
        max_edges: args.max_edges,
    };
    let ev = evaluate(&r, &e, &params, &opts)?;
    if let Some(path) = &args.edges {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        ev.graph.write_edges_jsonl(&mut out)?;
        out.flush()?;
    }
    let mut report = ev.report(&ReportOptions {
        include_members: args.members,
    });
    if let Some(est) = estimate {
        report = report.with_epsilon_estimate(est);
    }
    if let Some(s) = baseline {
        report = report.with_ipr(s);
    }
    write_output(args.out.as_deref(), &report.to_json_pretty())?;
    let [p, rc, c, q] = report.global_vector();
    let line = format!("[P, R, c(G), q(G)] = [{p}, {rc}, {c}, {q}]");
    if args.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(())
}

fn cmd_sparsify(args: &SparsifyArgs) -> anyhow::Result<()> {
    let w = load(&args.input, args.format, SetLabel::Reference)?;
    let delta = match (args.delta, args.delta_factor, args.epsilon) {
        (_, Some(f), Some(eps)) => delta_from(None, Some(f), eps)?.unwrap(),
        (Some(d), _, Some(eps)) => delta_from(Some(d), None, eps)?.unwrap(),
        (Some(d), _, None) => d,
        _ => return Err(usage("one of --delta or --delta-factor with --epsilon is required")),
    };
    let s = sparsify(&w, delta)?;
    if let Some(path) = &args.write_gcpc {
        write_gcpc(path, &w.select(&s.kept)?)?;
    }
    let out = SparsifyOutput {
        n: w.len(),
        delta: s.delta,
        order: geomca::sparsify::GREEDY_ORDER,
        kept: &s.kept,
        cover: &s.cover,
    };
    write_output(args.out.as_deref(), &serde_json::to_string_pretty(&out)?)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::EstimateEps(a) => cmd_estimate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Sparsify(a) => cmd_sparsify(a),
        Command::Experiment(x) => experiment::run(x),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<GeomcaError>() {
        Some(e) if e.is_validation() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
