//! `sparsetrig` — command-line front end for sparse trigonometric recovery.
//!
//! Four subcommands cover the workflow end to end:
//!
//! - `experiment` runs a Monte-Carlo sweep described by a JSON config and
//!   writes the aggregate table as CSV or JSON;
//! - `recover` draws one random instance, runs a single solver, and prints
//!   the solver's result as JSON;
//! - `bounds` evaluates one of the named recovery conditions or tail
//!   bounds on parameters supplied as JSON;
//! - `analyze` draws a sampling set and reports coherence or a restricted
//!   isometry constant of the resulting measurement operator.
//!
//! Every run is deterministic in its seed arguments. All fatal errors exit
//! nonzero with a message on stderr.

use std::fs;
use std::io;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use sparsetrig::analysis::{coherence, ric_exhaustive, ric_monte_carlo};
use sparsetrig::bounds::{
    coherence_tail, dete_guarantee, eigval_condition, omp_correlation_tail,
    omp_first_step_conditions, rip_sample_condition, rip_sample_constant, uniform_omp_conditions,
    BoundInputs, TailRegime,
};
use sparsetrig::bpdn::{bpdn_solve, BpdnConfig};
use sparsetrig::harness::{emit, emit_to_writer, run_sweep, EmitFormat, ExperimentConfig};
use sparsetrig::omp::{omp_recover, OmpConfig};
use sparsetrig::{
    noise_on_sphere, FrequencySet, FrequencySpec, MeasurementOperator, SamplingModel, SamplingSet,
    SparseCoefficients,
};

#[derive(Parser)]
#[command(
    name = "sparsetrig",
    version,
    about = "Recover sparse trigonometric polynomials from random samples"
)]
struct Cli {
    /// Worker threads for parallel trials (0 = one per CPU core).
    #[arg(long, global = true, env = "SPARSETRIG_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep from a JSON config file.
    Experiment(ExperimentArgs),
    /// Draw one random instance and run a single solver on it.
    Recover(RecoverArgs),
    /// Evaluate a named recovery condition or tail bound.
    Bounds(BoundsArgs),
    /// Report coherence or a restricted isometry constant of a drawn
    /// measurement operator.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Path to the experiment configuration (JSON; see README for the
    /// schema).
    #[arg(long)]
    config: PathBuf,
    /// Output file; omit to write to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Override the config's trials-per-point count.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args)]
struct RecoverArgs {
    /// Spatial dimension.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Frequency set Γ: a bare integer is the symmetric band of that width;
    /// anything else is parsed as a JSON frequency spec, e.g.
    /// '{"range":{"lo":-8,"hi":8}}'.
    #[arg(long)]
    gamma: String,
    /// Number of samples N.
    #[arg(long)]
    n: usize,
    /// Sparsity M of the drawn coefficient vector.
    #[arg(long)]
    m: usize,
    /// Noise level σ ≥ 0 (noise is drawn uniformly on the σ-sphere).
    #[arg(long)]
    sigma: f64,
    /// Recovery method.
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Instance seed; reproduces the experiment trial whose record carries
    /// the same `seed` value.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Greedy solver only: also stop once the residual norm reaches σ
    /// instead of always running M iterations.
    #[arg(long)]
    stop_at_sigma: bool,
    /// Sampling model for the measurement points.
    #[arg(long, value_enum, default_value_t = ModelArg::Continuous)]
    model: ModelArg,
    /// Grid size q for the grid models; defaults to the width of a bare
    /// integer --gamma.
    #[arg(long)]
    q: Option<u32>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Named condition or tail bound to evaluate.
    #[arg(long, value_enum)]
    theorem: TheoremArg,
    /// Bound parameters as a JSON object, e.g.
    /// '{"n":3000,"m":8,"delta":0.5,"epsilon":0.1}'.
    #[arg(long)]
    params: String,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// What to compute.
    #[arg(long, value_enum)]
    what: WhatArg,
    /// Frequency set Γ (same forms as `recover --gamma`).
    #[arg(long)]
    gamma: String,
    /// Number of samples N.
    #[arg(long)]
    n: usize,
    /// Spatial dimension.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Sampling model for the measurement points.
    #[arg(long, value_enum, default_value_t = ModelArg::Continuous)]
    model: ModelArg,
    /// Grid size q for the grid models; defaults to the width of a bare
    /// integer --gamma.
    #[arg(long)]
    q: Option<u32>,
    /// Seed for the sampling-set draw (and the subset draws under
    /// --trials).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Subset size M (required for --what ric).
    #[arg(long)]
    m: Option<usize>,
    /// Monte-Carlo subset draws; omit to enumerate all subsets
    /// exhaustively.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for EmitFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Csv => EmitFormat::Csv,
            FormatArg::Json => EmitFormat::Json,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Omp,
    Bpdn,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    /// Points i.i.d. uniform on [0, 2π)^d.
    Continuous,
    /// Points i.i.d. uniform on the size-q grid (repeats possible).
    GridReplacement,
    /// A uniformly random size-N subset of the size-q grid.
    GridSubset,
}

#[derive(Clone, Copy, ValueEnum)]
enum WhatArg {
    Coherence,
    Ric,
}

/// The named conditions and tail bounds `bounds --theorem` accepts. The
/// token set is part of the CLI contract; each maps to one evaluator in the
/// `bounds` module.
#[derive(Clone, Copy, ValueEnum)]
enum TheoremArg {
    /// Restricted-isometry sampling condition N/ln N ≥ C·δ⁻²·M·ln²M·lnD·ln(1/ε).
    #[value(name = "3.3")]
    RipSample,
    /// First-pick guarantee for the greedy solver (sample, eigenvalue, and
    /// noise conditions).
    #[value(name = "4.1")]
    FirstStep,
    /// Uniform greedy recovery conditions with the residual stopping rule.
    #[value(name = "4.2")]
    UniformOmp,
    /// Gram-spectrum concentration condition ⌊δ²N/(3eM)⌋ ≥ ln(c(δ)M/ε).
    #[value(name = "6.1")]
    Eigval,
    /// Deterministic coherence-based recovery guarantee.
    #[value(name = "6.3")]
    Dete,
    /// Coherence tail bound P(μ > t).
    #[value(name = "coherence")]
    CoherenceTail,
    /// Column-correlation tail bound for a fixed coefficient vector.
    #[value(name = "lemma6.2")]
    CorrelationTail,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Experiment(args) => run_experiment(args),
        Command::Recover(args) => run_recover(args),
        Command::Bounds(args) => run_bounds(args),
        Command::Analyze(args) => run_analyze(args),
    }
}

fn run_experiment(args: ExperimentArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", args.config.display()))?;
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    let stats = run_sweep(&cfg).context("running the sweep")?;
    match &args.out {
        Some(path) => emit(&stats, args.format.into(), path)
            .with_context(|| format!("writing {}", path.display()))?,
        None => emit_to_writer(&stats, args.format.into(), io::stdout().lock())
            .context("writing to stdout")?,
    }
    Ok(())
}

/// Parses `--gamma`: a bare integer means the symmetric band of that width,
/// anything else must be a JSON frequency spec.
fn parse_gamma(gamma: &str) -> Result<FrequencySpec> {
    if let Ok(width) = gamma.trim().parse::<u32>() {
        return Ok(FrequencySpec::Symmetric { width });
    }
    serde_json::from_str(gamma)
        .with_context(|| format!("--gamma is neither a width nor a frequency spec: {gamma}"))
}

/// Resolves the sampling model, defaulting the grid size to a bare-integer
/// `--gamma` width.
fn parse_model(model: ModelArg, q: Option<u32>, gamma: &str) -> Result<SamplingModel> {
    let grid_size = || -> Result<u32> {
        if let Some(q) = q {
            return Ok(q);
        }
        if let Ok(width) = gamma.trim().parse::<u32>() {
            return Ok(width);
        }
        bail!("grid models need --q when --gamma is not a bare width");
    };
    Ok(match model {
        ModelArg::Continuous => SamplingModel::ContinuousUniform,
        ModelArg::GridReplacement => SamplingModel::GridWithReplacement { q: grid_size()? },
        ModelArg::GridSubset => SamplingModel::GridSubset { q: grid_size()? },
    })
}

fn run_recover(args: RecoverArgs) -> Result<()> {
    if args.stop_at_sigma && args.method != MethodArg::Omp {
        bail!("--stop-at-sigma only applies to --method omp");
    }
    let spec = parse_gamma(&args.gamma)?;
    let model = parse_model(args.model, args.q, &args.gamma)?;
    let fs_set = FrequencySet::new(args.d, &spec)?;

    let c = SparseCoefficients::draw(&fs_set, args.m, args.seed)?;
    let x = SamplingSet::draw(&fs_set, model, args.n, args.seed)?;
    let eta = noise_on_sphere(args.n, args.sigma, args.seed)?;
    let op = MeasurementOperator::new(fs_set, x)?;
    let clean = op.forward(c.values())?;
    let y: Vec<Complex64> = clean.iter().zip(&eta).map(|(&a, &b)| a + b).collect();

    let report = match args.method {
        MethodArg::Omp => {
            let cfg = if args.stop_at_sigma {
                OmpConfig::with_sparsity_and_tolerance(args.m, args.sigma)
            } else {
                OmpConfig::with_sparsity(args.m)
            };
            serde_json::to_value(omp_recover(&op, &y, &cfg)?)?
        }
        MethodArg::Bpdn => {
            serde_json::to_value(bpdn_solve(&op, &y, &BpdnConfig::with_sigma(args.sigma))?)?
        }
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

/// Pulls a required field out of the parsed `--params` object.
fn need<T: Copy>(value: Option<T>, name: &str) -> Result<T> {
    value.with_context(|| format!("--params is missing required field \"{name}\""))
}

fn run_bounds(args: BoundsArgs) -> Result<()> {
    let p: BoundInputs = serde_json::from_str(&args.params).context("parsing --params")?;
    let report = match args.theorem {
        TheoremArg::RipSample => {
            let r = rip_sample_condition(
                need(p.n, "n")?,
                need(p.m, "m")?,
                need(p.d, "d")?,
                need(p.delta, "delta")?,
                need(p.epsilon, "epsilon")?,
            )?;
            let constant = p.constant.unwrap_or_else(rip_sample_constant);
            serde_json::json!({
                "lhs": r.lhs,
                "rhs_unit": r.rhs_unit,
                "m_is_one": r.m_is_one,
                "constant": constant,
                "holds": r.holds_under(constant),
            })
        }
        TheoremArg::FirstStep => serde_json::to_value(omp_first_step_conditions(
            need(p.n, "n")?,
            need(p.m, "m")?,
            need(p.d, "d")?,
            need(p.tau, "tau")?,
            need(p.epsilon, "epsilon")?,
            need(p.sigma, "sigma")?,
            need(p.c_norm2, "c_norm2")?,
            p.min_coeff,
            p.constant,
        )?)?,
        TheoremArg::UniformOmp => serde_json::to_value(uniform_omp_conditions(
            need(p.n, "n")?,
            need(p.m, "m")?,
            need(p.d_prime, "d_prime")?,
            need(p.tau, "tau")?,
            need(p.epsilon, "epsilon")?,
            need(p.sigma, "sigma")?,
            need(p.min_coeff, "min_coeff")?,
            p.constant,
        )?)?,
        TheoremArg::Eigval => serde_json::to_value(eigval_condition(
            need(p.n, "n")?,
            need(p.m, "m")?,
            need(p.delta, "delta")?,
            need(p.epsilon, "epsilon")?,
        )?)?,
        TheoremArg::Dete => serde_json::to_value(dete_guarantee(
            need(p.mu, "mu")?,
            need(p.m, "m")?,
            need(p.sigma, "sigma")?,
            need(p.min_coeff, "min_coeff")?,
        )?)?,
        TheoremArg::CoherenceTail => serde_json::to_value(coherence_tail(
            need(p.n, "n")?,
            need(p.t, "t")?,
            need(p.d_prime, "d_prime")?,
            p.model.unwrap_or(TailRegime::General),
            p.kappa,
        )?)?,
        TheoremArg::CorrelationTail => serde_json::to_value(omp_correlation_tail(
            need(p.n, "n")?,
            need(p.t, "t")?,
            need(p.c_norm2, "c_norm2")?,
            need(p.c_norm1, "c_norm1")?,
        )?)?,
    };
    let token = args
        .theorem
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string();
    let wrapped = serde_json::json!({ "bound": token, "report": report });
    println!("{}", serde_json::to_string_pretty(&wrapped)?);
    Ok(())
}

fn run_analyze(args: AnalyzeArgs) -> Result<()> {
    let spec = parse_gamma(&args.gamma)?;
    let model = parse_model(args.model, args.q, &args.gamma)?;
    let fs_set = FrequencySet::new(args.d, &spec)?;
    let x = SamplingSet::draw(&fs_set, model, args.n, args.seed)?;
    let op = MeasurementOperator::new(fs_set, x)?;

    let report = match args.what {
        WhatArg::Coherence => serde_json::to_value(coherence(&op)?)?,
        WhatArg::Ric => {
            let m = args.m.context("--what ric needs --m")?;
            match args.trials {
                Some(trials) => serde_json::to_value(ric_monte_carlo(&op, m, trials, args.seed)?)?,
                None => serde_json::to_value(ric_exhaustive(&op, m, None)?)?,
            }
        }
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
