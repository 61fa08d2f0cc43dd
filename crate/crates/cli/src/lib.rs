//! Command-line front end: `solve`, `prox-eval` and `check`.

pub mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use proxsplit::problems::{check_components, SolverTag};
use proxsplit::{ResultFile, SolveResult};

use config::{parse_scalar_kind, Resolver, RunConfig};

/// Exit status of a converged solve.
pub const EXIT_CONVERGED: i32 = 0;
/// Exit status for errors, and for `check` when an invariant fails.
pub const EXIT_ERROR: i32 = 1;
/// Exit status when the iteration cap was reached first.
pub const EXIT_MAX_ITER: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "proxsplit", version, about = "Proximal splitting solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the problem described by a JSON config.
    Solve(SolveArgs),
    /// Print the proximity operator of a scalar function at given points.
    ProxEval(ProxEvalArgs),
    /// Run the invariant suite on the components of a config's problem.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Trace CSV path [default: <config stem>.trace.csv next to the config].
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    /// Result JSON path [default: <config stem>.result.json next to the config].
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Seed for generated problem data.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub solver: Option<String>,
}

#[derive(Debug, Args)]
pub struct ProxEvalArgs {
    /// Scalar kind as JSON (e.g. '{"kind":"support","lo":-1,"hi":1}') or a
    /// bare tag for kinds without parameters (e.g. 'entropy').
    #[arg(long)]
    pub kind: String,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Points at which to evaluate.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub x: Vec<f64>,
    /// Evenly spaced points: LO HI COUNT.
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "COUNT"], allow_negative_numbers = true)]
    pub sweep: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random pairs per prox.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

/// Runs a parsed command and returns the process exit status. Errors are
/// reported on stderr and map to `EXIT_ERROR`.
pub fn run(cli: Cli) -> i32 {
    let out = std::io::stdout();
    let mut out = out.lock();
    let status = match cli.command {
        Command::Solve(a) => solve(&a, &mut out),
        Command::ProxEval(a) => prox_eval(&a, &mut out),
        Command::Check(a) => check(&a, &mut out),
    };
    match status {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn default_output(config: &Path, suffix: &str) -> PathBuf {
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    config.with_file_name(format!("{stem}.{suffix}"))
}

pub fn solve(args: &SolveArgs, out: &mut impl Write) -> Result<i32> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(t) = args.tol {
        cfg.stop.tol = Some(t);
    }
    if let Some(m) = args.max_iter {
        cfg.stop.max_iter = Some(m);
    }
    if let Some(s) = args.seed {
        cfg.seed = Some(s);
    }
    if let Some(s) = &args.solver {
        cfg.solver = Some(s.parse::<SolverTag>()?);
    }
    let resolver = Resolver::new(&args.config);
    let problem = resolver.problem(&cfg.problem, cfg.seed).context("problem")?;
    let solver = cfg.solver.unwrap_or(problem.solvers()[0]);
    let result = problem.solve(solver, &cfg.options(problem.dim()))?;

    let trace_path = args
        .trace
        .clone()
        .or_else(|| cfg.trace.as_ref().map(|p| resolver_path(&args.config, p)))
        .unwrap_or_else(|| default_output(&args.config, "trace.csv"));
    let out_path = args
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(|p| resolver_path(&args.config, p)))
        .unwrap_or_else(|| default_output(&args.config, "result.json"));
    write_outputs(&result, &trace_path, &out_path)?;

    let diagnostics = problem.validate(&result);
    writeln!(out, "problem     {}", problem.name())?;
    writeln!(out, "solver      {solver}")?;
    writeln!(out, "converged   {}", result.converged)?;
    writeln!(out, "iterations  {}", result.iterations)?;
    writeln!(out, "objective   {:.12e}", problem.objective(&result.x))?;
    writeln!(out, "x           {:?}", result.x.as_slice())?;
    write!(out, "{diagnostics}")?;
    writeln!(out, "trace       {}", trace_path.display())?;
    writeln!(out, "result      {}", out_path.display())?;
    Ok(if result.converged {
        EXIT_CONVERGED
    } else {
        EXIT_MAX_ITER
    })
}

/// Output paths in the config are relative to the config's directory.
fn resolver_path(config: &Path, p: &Path) -> PathBuf {
    match config.parent() {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

fn write_outputs(result: &SolveResult, trace: &Path, out: &Path) -> Result<()> {
    let f = File::create(trace).with_context(|| format!("cannot create {}", trace.display()))?;
    result.trace.write_csv(BufWriter::new(f))?;
    let f = File::create(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, &ResultFile::from(result))?;
    writeln!(w)?;
    Ok(())
}

pub fn prox_eval(args: &ProxEvalArgs, out: &mut impl Write) -> Result<i32> {
    let kind = parse_scalar_kind(&args.kind)?;
    if !(args.gamma > 0.0 && args.gamma.is_finite()) {
        bail!("gamma must be a positive real, got {}", args.gamma);
    }
    let mut xs = args.x.clone();
    if let Some(s) = &args.sweep {
        let (lo, hi, count) = (s[0], s[1], s[2]);
        if !(count >= 1.0 && count.fract() == 0.0) || !(lo <= hi) {
            bail!("sweep needs LO <= HI and a positive integer COUNT");
        }
        let n = count as usize;
        let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
        xs.extend((0..n).map(|i| lo + step * i as f64));
    }
    if xs.is_empty() {
        bail!("give evaluation points with --x or --sweep");
    }
    writeln!(out, "{:>24} {:>24} {:>24}", "x", "prox(x)", "objective")?;
    for x in xs {
        if !x.is_finite() {
            bail!("evaluation point {x} is not finite");
        }
        let p = kind.prox(args.gamma, x);
        let objective = args.gamma * kind.eval(p) + 0.5 * (x - p).powi(2);
        writeln!(out, "{x:>24.16e} {p:>24.16e} {objective:>24.16e}")?;
    }
    Ok(EXIT_CONVERGED)
}

pub fn check(args: &CheckArgs, out: &mut impl Write) -> Result<i32> {
    let cfg = RunConfig::load(&args.config)?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let problem = Resolver::new(&args.config)
        .problem(&cfg.problem, cfg.seed)
        .context("problem")?;
    let d = check_components(&problem.components(), args.trials, seed);
    writeln!(out, "problem     {}", problem.name())?;
    write!(out, "{d}")?;
    Ok(if d.passed() { EXIT_CONVERGED } else { EXIT_ERROR })
}
