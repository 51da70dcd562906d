//! Command-line frontend: estimation, exact solving, influence and
//! sensitivity analysis, model generation, and a simulation benchmark.
//!
//! Exit codes: 0 success, 1 usage error, 2 operational failure.

mod record;

use std::fmt::{self, Display};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use pbn_steady::analysis::{
    influence_report, sensitivity_onoff, sensitivity_selection_prob, Norm,
    ReferenceDistribution, SensitivityMode,
};
use pbn_steady::exact::{exact_meta_probability, steady_state};
use pbn_steady::model::{GeneratorSpec, PbnModel};
use pbn_steady::sim::{MetaPredicate, SimCursor};
use pbn_steady::twostate::{
    run, safe_n0_range, Heuristic, PbnMetaSource, TwoStateParams, TwoStateRun,
};
use pbn_steady::Error;

use record::Record;

#[derive(Parser)]
#[command(
    name = "pbn-steady",
    version,
    about = "Steady-state estimation and analysis for probabilistic Boolean networks",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the steady-state probability of a meta state.
    Steady(SteadyArgs),
    /// Exact steady-state distribution or meta-state probability (small n).
    Exact(ExactArgs),
    /// Influence of every node on one target node.
    Influence(InfluenceArgs),
    /// Long-run sensitivity of a model perturbation.
    Sensitivity(SensitivityArgs),
    /// Generate a random model.
    Generate(GenerateArgs),
    /// Parent-count density of a model.
    Density(DensityArgs),
    /// Safe pilot-size range for a precision/confidence pair.
    SafeN0(SafeN0Args),
    /// Raw synchronous-simulation throughput.
    Bench(BenchArgs),
}

/// Pilot size: a positive integer or `auto` (safe upper bound).
#[derive(Debug, Clone, Copy)]
struct N0Arg(Option<u64>);

impl FromStr for N0Arg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(N0Arg(None));
        }
        s.parse::<u64>()
            .map(|v| N0Arg(Some(v)))
            .map_err(|_| format!("expected a positive integer or \"auto\", got {s:?}"))
    }
}

impl Display for N0Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("auto"),
        }
    }
}

/// Estimator parameters shared by every estimating subcommand.
#[derive(Args, Clone)]
struct EstArgs {
    /// Half-width of the confidence interval (precision target).
    #[arg(long)]
    r: f64,
    /// Confidence level in (0,1).
    #[arg(long, default_value_t = 0.95)]
    s: f64,
    /// Burn-in convergence tolerance.
    #[arg(long, default_value_t = 1e-10)]
    epsilon: f64,
    /// Subsampling lag: every k-th simulation step is observed.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Initial burn-in guess (subsampled scale).
    #[arg(long, default_value_t = 5)]
    m0: u64,
    /// Pilot sample size, or "auto" for the safe upper bound.
    #[arg(long, default_value = "auto")]
    n0: N0Arg,
    /// Initialization heuristic: simple, controlled, pitfall, none.
    #[arg(long, default_value_t = Heuristic::Simple)]
    heuristic: Heuristic,
}

impl EstArgs {
    fn params(&self) -> TwoStateParams {
        let mut p = TwoStateParams::new(self.r);
        p.s = self.s;
        p.epsilon = self.epsilon;
        p.k = self.k;
        p.m0 = self.m0;
        p.n0 = self.n0.0;
        p.heuristic = self.heuristic;
        p
    }

    fn echo(&self, rec: &mut Record) {
        rec.push("r", self.r)
            .push("s", self.s)
            .push("epsilon", self.epsilon)
            .push("k", self.k)
            .push("m0", self.m0)
            .push("n0", self.n0)
            .push("heuristic", self.heuristic);
    }
}

/// Like [`EstArgs`] but with `--r` optional, for subcommands where
/// estimation is only one of the modes.
#[derive(Args, Clone)]
struct OptEstArgs {
    /// Half-width of the confidence interval (estimated modes only).
    #[arg(long)]
    r: Option<f64>,
    /// Confidence level in (0,1).
    #[arg(long, default_value_t = 0.95)]
    s: f64,
    /// Burn-in convergence tolerance.
    #[arg(long, default_value_t = 1e-10)]
    epsilon: f64,
    /// Subsampling lag: every k-th simulation step is observed.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Initial burn-in guess (subsampled scale).
    #[arg(long, default_value_t = 5)]
    m0: u64,
    /// Pilot sample size, or "auto" for the safe upper bound.
    #[arg(long, default_value = "auto")]
    n0: N0Arg,
    /// Initialization heuristic: simple, controlled, pitfall, none.
    #[arg(long, default_value_t = Heuristic::Simple)]
    heuristic: Heuristic,
}

impl OptEstArgs {
    fn params(&self, why: &str) -> Result<TwoStateParams, CliError> {
        let r = self.r.ok_or_else(|| CliError::Usage(format!("--r is required {why}")))?;
        let mut p = TwoStateParams::new(r);
        p.s = self.s;
        p.epsilon = self.epsilon;
        p.k = self.k;
        p.m0 = self.m0;
        p.n0 = self.n0.0;
        p.heuristic = self.heuristic;
        Ok(p)
    }
}

/// Output destination and format.
#[derive(Args, Clone)]
struct OutArgs {
    /// Write records to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Aligned multi-line blocks instead of one record per line.
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct SteadyArgs {
    /// Model file (.pbn text).
    #[arg(long)]
    model: PathBuf,
    /// Meta-state conjunction such as "0=1&gene_a=0".
    #[arg(long)]
    predicate: String,
    #[command(flatten)]
    est: EstArgs,
    /// Simulation seed.
    #[arg(long)]
    seed: u64,
    /// Independent replications, seeded seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    replications: u64,
    /// Worker threads for replications (default: PBN_STEADY_JOBS, else all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ExactArgs {
    /// Model file (.pbn text).
    #[arg(long)]
    model: PathBuf,
    /// Meta-state conjunction; omit to dump the full distribution.
    #[arg(long)]
    predicate: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReferenceKind {
    /// Parent assignments equally likely (combinatorial influence).
    Uniform,
    /// Exact steady-state distribution (small networks).
    Exact,
    /// Steady-state probabilities estimated by two-state runs.
    Estimated,
}

impl Display for ReferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferenceKind::Uniform => "uniform",
            ReferenceKind::Exact => "exact",
            ReferenceKind::Estimated => "estimated",
        })
    }
}

#[derive(Args)]
struct InfluenceArgs {
    /// Model file (.pbn text).
    #[arg(long)]
    model: PathBuf,
    /// Target node (index or name) whose regulators are scored.
    #[arg(long)]
    target: String,
    /// Reference distribution for the expectation.
    #[arg(long, default_value_t = ReferenceKind::Uniform)]
    reference: ReferenceKind,
    #[command(flatten)]
    est: OptEstArgs,
    /// Root seed (required with --reference estimated).
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SensitivityArgs {
    /// Model file (.pbn text).
    #[arg(long)]
    model: PathBuf,
    /// Perturbed node (index or name).
    #[arg(long)]
    node: String,
    /// Function index within the node (selection-probability mode).
    #[arg(long)]
    function: Option<usize>,
    /// New selection probability for --function; the rest rescale.
    #[arg(long)]
    new_p: Option<f64>,
    /// Permanent on/off intervention instead of a probability change.
    #[arg(long, conflicts_with_all = ["function", "new_p"])]
    onoff: bool,
    /// Observed nodes defining the compared joint, comma-separated.
    #[arg(long, value_delimiter = ',')]
    observed: Vec<String>,
    /// Distance norm: l1, l2, linf.
    #[arg(long, default_value_t = Norm::L1)]
    norm: Norm,
    /// Compare exact joint distributions instead of estimated ones.
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    est: OptEstArgs,
    /// Root seed (required unless --exact).
    #[arg(long)]
    seed: Option<u64>,
    /// Common random numbers: identical probe seeds on both sides.
    #[arg(long)]
    paired_seeds: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of nodes.
    #[arg(long)]
    nodes: usize,
    /// Minimum predictor functions per node.
    #[arg(long, default_value_t = 1)]
    min_funcs: usize,
    /// Maximum predictor functions per node.
    #[arg(long, default_value_t = 3)]
    max_funcs: usize,
    /// Minimum parents per function.
    #[arg(long, default_value_t = 1)]
    min_parents: usize,
    /// Maximum parents per function.
    #[arg(long, default_value_t = 3)]
    max_parents: usize,
    /// Perturbation parameter.
    #[arg(long)]
    p: f64,
    /// Generator seed.
    #[arg(long)]
    seed: u64,
    /// Write the model text here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    /// Model file (.pbn text).
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SafeN0Args {
    /// Half-width of the confidence interval.
    #[arg(long)]
    r: f64,
    /// Confidence level in (0,1).
    #[arg(long, default_value_t = 0.95)]
    s: f64,
}

#[derive(Args)]
struct BenchArgs {
    /// Model file (.pbn text).
    #[arg(long)]
    model: PathBuf,
    /// Synchronous steps to simulate.
    #[arg(long)]
    steps: u64,
    /// Simulation seed.
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

/// Usage problems exit 1; operational failures exit 2.
enum CliError {
    Usage(String),
    Op(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Op(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Steady(args) => cmd_steady(args),
        Command::Exact(args) => cmd_exact(args),
        Command::Influence(args) => cmd_influence(args),
        Command::Sensitivity(args) => cmd_sensitivity(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Density(args) => cmd_density(args),
        Command::SafeN0(args) => cmd_safe_n0(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}\nRun with --help for the flag reference.");
            ExitCode::from(1)
        }
        Err(CliError::Op(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// The invoking command line, shell-quoted where needed, echoed into records.
fn command_echo() -> String {
    fn quote(arg: &str) -> String {
        let plain = !arg.is_empty()
            && arg
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "-_=+./:,@%^".contains(c));
        if plain {
            arg.to_owned()
        } else {
            format!("'{}'", arg.replace('\'', "'\\''"))
        }
    }
    std::env::args().map(|a| quote(&a)).collect::<Vec<_>>().join(" ")
}

/// Reads, hashes, and parses a model file.
fn load_model(path: &Path) -> Result<(PbnModel, String), CliError> {
    let bytes = fs::read(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    let hash: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    let text = String::from_utf8(bytes).map_err(|_| {
        CliError::Op(Error::Parse {
            line: 0,
            message: format!("{} is not valid UTF-8", path.display()),
        })
    })?;
    Ok((PbnModel::parse(&text)?, hash))
}

/// Writes records to stdout or `--out`, one line each (or pretty blocks).
fn emit(out: &OutArgs, records: &[Record]) -> Result<(), CliError> {
    let mut text = String::new();
    for rec in records {
        if out.pretty {
            text.push_str(&rec.pretty());
        } else {
            text.push_str(&rec.line());
            text.push('\n');
        }
    }
    match &out.out {
        Some(path) => fs::write(path, text).map_err(Error::from)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn model_fields(rec: &mut Record, path: &Path, hash: &str) {
    rec.push("command", command_echo())
        .push("model", path.display())
        .push("model_sha256", hash);
}

fn steady_record(
    args: &SteadyArgs,
    hash: &str,
    predicate: &MetaPredicate,
    replication: u64,
    seed: u64,
    run: &TwoStateRun,
) -> Record {
    let mut rec = Record::new("steady");
    model_fields(&mut rec, &args.model, hash);
    rec.push("predicate", predicate.canonical_text());
    args.est.echo(&mut rec);
    rec.push("replication", replication)
        .push("seed", seed)
        .push("resolved_n0", run.resolved_n0)
        .push("alpha_hat", run.alpha_hat)
        .push("beta_hat", run.beta_hat)
        .push("burn_in_t", run.burn_in_t)
        .push("sample_obs", run.sample_obs)
        .push("m_steps", run.burn_in_steps)
        .push("n_steps", run.sample_steps)
        .push("total_steps", run.total_steps)
        .push("observations", run.observations)
        .push("iterations", run.iterations)
        .push("q_hat", run.q_hat)
        .push("wall_time_ms", run.wall_time.as_secs_f64() * 1e3);
    rec
}

fn cmd_steady(args: SteadyArgs) -> Result<(), CliError> {
    if args.replications == 0 {
        return Err(CliError::Usage("--replications must be at least 1".into()));
    }
    let (model, hash) = load_model(&args.model)?;
    let predicate = MetaPredicate::parse(&args.predicate, &model)?;
    let params = args.est.params();
    params.validate()?;

    let single = |seed: u64| -> Result<TwoStateRun, Error> {
        let mut source = PbnMetaSource::new(&model, predicate.clone(), params.k, seed)?;
        run(&mut source, &params)
    };

    let started = Instant::now();
    let runs: Vec<TwoStateRun> = if args.replications == 1 {
        vec![single(args.seed)?]
    } else {
        let jobs = args
            .jobs
            .or_else(|| std::env::var("PBN_STEADY_JOBS").ok().and_then(|v| v.parse().ok()))
            .unwrap_or(0);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..args.replications)
                .into_par_iter()
                .map(|i| single(args.seed.wrapping_add(i)))
                .collect::<Result<Vec<_>, Error>>()
        })?
    };
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;

    let mut records = Vec::with_capacity(runs.len() + 1);
    for (i, one) in runs.iter().enumerate() {
        let seed = args.seed.wrapping_add(i as u64);
        records.push(steady_record(&args, &hash, &predicate, i as u64, seed, one));
    }
    if args.replications > 1 {
        let n = runs.len() as f64;
        let mean = runs.iter().map(|x| x.q_hat).sum::<f64>() / n;
        let var = runs.iter().map(|x| (x.q_hat - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for x in &runs {
            min = min.min(x.q_hat);
            max = max.max(x.q_hat);
        }
        let steps = runs.iter().map(|x| x.total_steps).sum::<u64>();
        let mut rec = Record::new("steady_summary");
        model_fields(&mut rec, &args.model, &hash);
        rec.push("predicate", predicate.canonical_text())
            .push("replications", args.replications)
            .push("seed", args.seed)
            .push("q_mean", mean)
            .push("q_stddev", var.sqrt())
            .push("q_min", min)
            .push("q_max", max)
            .push("total_steps_sum", steps)
            .push("wall_time_ms", elapsed_ms);
        records.push(rec);
    }
    emit(&args.out, &records)
}

fn cmd_exact(args: ExactArgs) -> Result<(), CliError> {
    let (model, hash) = load_model(&args.model)?;
    let started = Instant::now();
    let mut records = Vec::new();
    match &args.predicate {
        Some(text) => {
            let predicate = MetaPredicate::parse(text, &model)?;
            let q = exact_meta_probability(&model, &predicate)?;
            let mut rec = Record::new("exact");
            model_fields(&mut rec, &args.model, &hash);
            rec.push("nodes", model.n())
                .push("predicate", predicate.canonical_text())
                .push("q_exact", q)
                .push("wall_time_ms", started.elapsed().as_secs_f64() * 1e3);
            records.push(rec);
        }
        None => {
            let pi = steady_state(&model)?;
            for (state, &prob) in pi.probs().iter().enumerate() {
                let mut rec = Record::new("exact_state");
                rec.push("state", state).push("probability", prob);
                records.push(rec);
            }
            let mut rec = Record::new("exact_summary");
            model_fields(&mut rec, &args.model, &hash);
            rec.push("nodes", model.n())
                .push("states", pi.probs().len())
                .push("wall_time_ms", started.elapsed().as_secs_f64() * 1e3);
            records.push(rec);
        }
    }
    emit(&args.out, &records)
}

fn cmd_influence(args: InfluenceArgs) -> Result<(), CliError> {
    let (model, hash) = load_model(&args.model)?;
    let target = model.resolve_node(&args.target)? as u32;
    let mode = match args.reference {
        ReferenceKind::Uniform => ReferenceDistribution::Uniform,
        ReferenceKind::Exact => ReferenceDistribution::SteadyStateExact,
        ReferenceKind::Estimated => {
            let params = args.est.params("with --reference estimated")?;
            params.validate()?;
            let seed = args.seed.ok_or_else(|| {
                CliError::Usage("--seed is required with --reference estimated".into())
            })?;
            ReferenceDistribution::SteadyStateEstimated { params, seed }
        }
    };
    let started = Instant::now();
    let report = influence_report(&model, target, &mode)?;
    let mut records = Vec::with_capacity(report.values.len() + 1);
    for (source, &value) in report.values.iter().enumerate() {
        let mut rec = Record::new("influence");
        rec.push("target", target).push("source", source).push("value", value);
        records.push(rec);
    }
    let mut rec = Record::new("influence_summary");
    model_fields(&mut rec, &args.model, &hash);
    rec.push("target", target)
        .push("reference", args.reference)
        .push("probes", report.probes)
        .push("wall_time_ms", started.elapsed().as_secs_f64() * 1e3);
    if let Some(seed) = args.seed {
        rec.push("seed", seed);
    }
    records.push(rec);
    emit(&args.out, &records)
}

fn cmd_sensitivity(args: SensitivityArgs) -> Result<(), CliError> {
    if args.observed.is_empty() {
        return Err(CliError::Usage("at least one --observed node is required".into()));
    }
    let (model, hash) = load_model(&args.model)?;
    let node = model.resolve_node(&args.node)?;
    let observed: Vec<u32> = args
        .observed
        .iter()
        .map(|t| model.resolve_node(t).map(|i| i as u32))
        .collect::<Result<_, Error>>()?;
    let mode = if args.exact {
        SensitivityMode::Exact
    } else {
        let params = args.est.params("unless --exact is given")?;
        params.validate()?;
        let seed = args
            .seed
            .ok_or_else(|| CliError::Usage("--seed is required unless --exact is given".into()))?;
        SensitivityMode::Estimated { params, seed, paired_seeds: args.paired_seeds }
    };

    let started = Instant::now();
    let mut rec = Record::new("sensitivity");
    model_fields(&mut rec, &args.model, &hash);
    rec.push("node", node);
    let value = if args.onoff {
        rec.push("kind", "onoff");
        sensitivity_onoff(&model, node, &observed, args.norm, &mode)?
    } else {
        let function = args.function.ok_or_else(|| {
            CliError::Usage("--function and --new-p are required unless --onoff".into())
        })?;
        let new_p = args.new_p.ok_or_else(|| {
            CliError::Usage("--function and --new-p are required unless --onoff".into())
        })?;
        rec.push("kind", "selection_prob").push("function", function).push("new_p", new_p);
        sensitivity_selection_prob(&model, node, function, new_p, &observed, args.norm, &mode)?
    };
    let observed_echo =
        observed.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
    rec.push("observed", observed_echo)
        .push("norm", args.norm)
        .push("mode", if args.exact { "exact" } else { "estimated" });
    if let Some(seed) = args.seed {
        rec.push("seed", seed).push("paired_seeds", args.paired_seeds);
    }
    rec.push("sensitivity", value)
        .push("wall_time_ms", started.elapsed().as_secs_f64() * 1e3);
    emit(&args.out, &[rec])
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let spec = GeneratorSpec {
        node_count: args.nodes,
        min_funcs: args.min_funcs,
        max_funcs: args.max_funcs,
        min_parents: args.min_parents,
        max_parents: args.max_parents,
        perturbation_p: args.p,
        seed: args.seed,
    };
    let model = PbnModel::generate(&spec)?;
    let text = format!(
        "# generated: nodes={} seed={} density={}\n{}",
        args.nodes,
        args.seed,
        model.density(),
        model.serialize()
    );
    match &args.out {
        Some(path) => fs::write(path, text).map_err(Error::from)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_density(args: DensityArgs) -> Result<(), CliError> {
    let (model, hash) = load_model(&args.model)?;
    let mut rec = Record::new("density");
    model_fields(&mut rec, &args.model, &hash);
    let functions: usize = model.nodes().iter().map(|node| node.functions().len()).sum();
    rec.push("nodes", model.n())
        .push("functions", functions)
        .push("density", model.density());
    emit(&args.out, &[rec])
}

fn cmd_safe_n0(args: SafeN0Args) -> Result<(), CliError> {
    match safe_n0_range(args.r, args.s)? {
        Some((lo, hi)) => println!("[{lo},{hi}]"),
        None => println!("empty"),
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let (model, hash) = load_model(&args.model)?;
    let mut cursor = SimCursor::new(&model, args.seed)?;
    let started = Instant::now();
    cursor.simulate(args.steps);
    let secs = started.elapsed().as_secs_f64();
    let mut rec = Record::new("bench");
    model_fields(&mut rec, &args.model, &hash);
    rec.push("nodes", model.n())
        .push("steps", args.steps)
        .push("seed", args.seed)
        .push("wall_time_ms", secs * 1e3)
        .push("steps_per_sec", args.steps as f64 / secs);
    emit(&args.out, &[rec])
}
