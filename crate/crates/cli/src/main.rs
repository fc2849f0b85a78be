//! `mpbcfw` command-line tool: `train`, `gen` and `eval`.

mod trace;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mpbcfw::data::{self, AnyDataset, GenParams, Model, ModelMetadata};
use mpbcfw::solver::{
    train, Algorithm, ApproxPolicy, Clock, SimulatedClock, SolverConfig, Stopping, TraceRecord,
    WallClock,
};
use mpbcfw::{Dataset, Task, TaskKind};

#[derive(Parser)]
#[command(name = "mpbcfw", version, about = "Structural SVM training with (multi-plane) block-coordinate Frank-Wolfe")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write its convergence trace.
    Train(TrainArgs),
    /// Generate a synthetic dataset.
    Gen(GenArgs),
    /// Evaluate a model on a dataset.
    Eval(EvalArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Dataset task; detected from the file when omitted.
    #[arg(long, value_parser = parse_task)]
    task: Option<TaskKind>,
    #[arg(long, default_value = "mp-bcfw", value_parser = parse_algo)]
    algo: Algorithm,
    /// Regularizer, or `auto` for 1/n.
    #[arg(long, default_value = "auto", value_parser = parse_lambda)]
    lambda: Lambda,
    /// Maximum number of outer iterations.
    #[arg(long)]
    passes: Option<usize>,
    #[arg(long)]
    gap_tol: Option<f64>,
    #[arg(long)]
    time_budget_ms: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Working-set capacity N.
    #[arg(long, default_value_t = 1000)]
    cache_size: usize,
    /// Maximum approximate passes per outer iteration M.
    #[arg(long, default_value_t = 1000)]
    max_approx_passes: usize,
    /// Inactivity horizon T in outer iterations.
    #[arg(long, default_value_t = 10)]
    inactivity: usize,
    /// `auto` or `fixed:K`.
    #[arg(long, default_value = "auto", value_parser = parse_policy)]
    approx_policy: ApproxPolicy,
    /// Evaluate the primal every this many iterations (0 = never).
    #[arg(long, default_value_t = 1)]
    primal_every: usize,
    /// Trace output file.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = LogFormat::Csv)]
    log_format: LogFormat,
    /// Model output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the wall clock by a simulated one charging EXACT seconds per
    /// exact oracle call and APPROX seconds per approximate block update.
    #[arg(long, value_name = "EXACT:APPROX", value_parser = parse_sim_clock)]
    sim_clock: Option<(f64, f64)>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_task)]
    task: TaskKind,
    #[arg(long, default_value_t = 20)]
    n: usize,
    /// Chain length.
    #[arg(long, default_value_t = 5)]
    len: usize,
    /// Classes (multiclass) or labels per position (chain).
    #[arg(long, default_value_t = 3)]
    labels: usize,
    /// Feature dimension [default: labels-1 for multiclass, labels for chain, 3 for grids]
    #[arg(long)]
    dim: Option<usize>,
    /// Grid size as ROWSxCOLS.
    #[arg(long, default_value = "4x4", value_parser = parse_grid)]
    grid: (usize, usize),
    #[arg(long, default_value_t = 0.5)]
    smoothing: f64,
    /// Distance of the class means from the origin.
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LogFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy)]
enum Lambda {
    Auto,
    Value(f64),
}

fn parse_task(s: &str) -> Result<TaskKind, String> {
    s.parse().map_err(|e: mpbcfw::Error| e.to_string())
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: mpbcfw::Error| e.to_string())
}

fn parse_policy(s: &str) -> Result<ApproxPolicy, String> {
    s.parse().map_err(|e: mpbcfw::Error| e.to_string())
}

fn parse_lambda(s: &str) -> Result<Lambda, String> {
    if s == "auto" {
        return Ok(Lambda::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(Lambda::Value(v)),
        _ => Err(format!("expected 'auto' or a positive number, got '{s}'")),
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("expected ROWSxCOLS, got '{s}'");
    let (r, c) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?))
}

fn parse_sim_clock(s: &str) -> Result<(f64, f64), String> {
    let bad = || format!("expected EXACT:APPROX costs in seconds, got '{s}'");
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.parse().map_err(|_| bad())?;
    let b: f64 = b.parse().map_err(|_| bad())?;
    if a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite() {
        Ok((a, b))
    } else {
        Err(bad())
    }
}

/// Command failures, split by exit status.
enum Failure {
    Usage(String),
    Runtime(String),
}

/// Runtime failure prefixed with the file it concerns.
fn on_file(path: &std::path::Path) -> impl Fn(mpbcfw::Error) -> Failure + '_ {
    move |e| match e {
        mpbcfw::Error::Io(io) => Failure::Runtime(format!("{}: {io}", path.display())),
        e => Failure::Runtime(e.to_string()),
    }
}

impl From<mpbcfw::Error> for Failure {
    fn from(e: mpbcfw::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Eval(a) => cmd_eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn solver_config(a: &TrainArgs) -> Result<SolverConfig, Failure> {
    let config = SolverConfig {
        algorithm: a.algo,
        lambda: match a.lambda {
            Lambda::Auto => None,
            Lambda::Value(v) => Some(v),
        },
        cache_size: a.cache_size,
        max_approx_passes: a.max_approx_passes,
        inactivity: a.inactivity,
        approx_policy: a.approx_policy,
        seed: a.seed,
        stopping: Stopping {
            max_iterations: a.passes,
            gap_tolerance: a.gap_tol,
            time_budget: a.time_budget_ms.map(|ms| ms / 1e3),
            max_exact_calls: None,
        },
        primal_every: a.primal_every,
    };
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(config)
}

struct Trained {
    weights: Vec<f64>,
    lambda: f64,
    trace: Vec<TraceRecord>,
    final_primal: f64,
}

fn run_training<T: Task>(
    config: &SolverConfig,
    data: &Dataset<T>,
    clock: &mut dyn Clock,
) -> mpbcfw::Result<Trained> {
    let out = train(config, data, clock)?;
    let final_primal = data.primal(&out.weights, out.lambda)?;
    Ok(Trained {
        weights: out.weights,
        lambda: out.lambda,
        trace: out.trace,
        final_primal,
    })
}

fn cmd_train(a: TrainArgs) -> Result<(), Failure> {
    let config = solver_config(&a)?;
    let dataset = data::load_dataset(&a.data, a.task).map_err(on_file(&a.data))?;
    if let Some(kind) = a.task {
        if dataset.kind() != kind {
            return Err(Failure::Runtime(format!(
                "dataset holds {} data, --task says {kind}",
                dataset.kind()
            )));
        }
    }
    let mut wall = WallClock::new();
    let mut sim;
    let clock: &mut dyn Clock = match a.sim_clock {
        Some((exact, approx)) => {
            sim = SimulatedClock::new(exact, approx);
            &mut sim
        }
        None => &mut wall,
    };
    let trained = match &dataset {
        AnyDataset::Multiclass(d) => run_training(&config, d, clock)?,
        AnyDataset::Chain(d) => run_training(&config, d, clock)?,
        AnyDataset::BinaryPotts(d) => run_training(&config, d, clock)?,
    };

    if let Some(path) = &a.log {
        let written = match a.log_format {
            LogFormat::Csv => trace::write_csv(path, &trained.trace),
            LogFormat::Json => trace::write_json_lines(path, &trained.trace),
        };
        written.map_err(|e| Failure::Runtime(format!("writing {}: {e}", path.display())))?;
    }
    if let Some(path) = &a.out {
        let header = dataset.header();
        let model = Model {
            weights: trained.weights.clone(),
            meta: ModelMetadata {
                task: dataset.kind(),
                algorithm: a.algo.to_string(),
                lambda: trained.lambda,
                seed: a.seed,
                dim: dataset.dim(),
                num_labels: header.num_labels,
                feature_dim: header.feature_dim,
            },
        };
        data::save_model(&model, path).map_err(on_file(path))?;
    }

    let last = trained.trace.last().expect("at least one iteration");
    let dual = last.dual_avg.unwrap_or(last.dual);
    println!(
        "iterations {} exact_calls {} approx_calls {} dual {} primal {} gap {}",
        last.iter,
        last.exact_calls,
        last.approx_calls,
        dual,
        trained.final_primal,
        trained.final_primal - dual
    );
    Ok(())
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    let dim = a.dim.unwrap_or(match a.task {
        TaskKind::Multiclass => a.labels.saturating_sub(1).max(1),
        TaskKind::Chain => a.labels,
        TaskKind::BinaryPotts => 3,
    });
    let params = GenParams {
        n: a.n,
        num_labels: a.labels,
        len: a.len,
        dim,
        rows: a.grid.0,
        cols: a.grid.1,
        smoothing: a.smoothing,
        separation: a.separation,
    };
    let dataset =
        data::generate(a.task, &params, a.seed).map_err(|e| Failure::Usage(e.to_string()))?;
    dataset.save(&a.out).map_err(on_file(&a.out))?;
    println!("wrote {} {} examples to {}", dataset.len(), a.task, a.out.display());
    Ok(())
}

fn evaluate<T: Task>(data: &Dataset<T>, model: &Model) -> mpbcfw::Result<(f64, f64)> {
    Ok((
        data.primal(&model.weights, model.meta.lambda)?,
        data.prediction_error(&model.weights)?,
    ))
}

fn cmd_eval(a: EvalArgs) -> Result<(), Failure> {
    let model = data::load_model(&a.model).map_err(on_file(&a.model))?;
    let dataset = data::load_dataset(&a.data, None).map_err(on_file(&a.data))?;
    model.check_compatible(&dataset.header())?;
    let (primal, error) = match &dataset {
        AnyDataset::Multiclass(d) => evaluate(d, &model)?,
        AnyDataset::Chain(d) => evaluate(d, &model)?,
        AnyDataset::BinaryPotts(d) => evaluate(d, &model)?,
    };
    println!("primal {primal} error_rate {error}");
    Ok(())
}
