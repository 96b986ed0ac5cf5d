use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mixcert::harness::{accuracy_experiment, coverage_experiment, width_experiment};
use mixcert::{
    algorithm1, bootstrap_estimate, chain_family, collect_statistics, combined_intervals,
    plugin_estimate, read_chain, read_path, simulate_path, stopping_rule, to_json_string,
    write_chain, write_path, Error, ExperimentConfig, FamilyParams, Init, SimulatedSource,
    FAMILY_NAMES,
};

#[derive(Parser)]
#[command(
    name = "mixcert",
    version,
    about = "Mixing-time certificates from a single Markov chain path"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build chains from the built-in families.
    #[command(subcommand)]
    Chains(ChainsCommand),
    /// Simulate a sample path from a chain file.
    Simulate(SimulateArgs),
    /// Point estimates of the spectral gap and minimum stationary probability.
    Estimate(EstimateArgs),
    /// Confidence intervals from a sample path.
    Ci(CiArgs),
    /// Monte Carlo checks against a chain with known spectrum.
    #[command(subcommand)]
    Validate(ValidateCommand),
    /// Sequential stopping rule on a simulated path.
    Stoprule(StopArgs),
}

#[derive(Subcommand)]
enum ChainsCommand {
    /// Write one family instance as a chain file.
    Make(MakeArgs),
    /// List the family names.
    List,
}

#[derive(Args)]
struct MakeArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    pibar: Option<f64>,
    #[arg(long)]
    gammabar: Option<f64>,
    #[arg(long)]
    index: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    chain: PathBuf,
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// stationary, uniform or state:<i>
    #[arg(long, default_value = "stationary")]
    init: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Plugin,
    Bootstrap,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    path: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Plugin)]
    method: Method,
}

#[derive(Args)]
struct CiArgs {
    #[arg(long)]
    path: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Refine with the plug-in deviation bounds.
    #[arg(long)]
    combined: bool,
    /// Absolute constant of the plug-in bounds.
    #[arg(long, default_value_t = 1.0)]
    constant: f64,
}

#[derive(Subcommand)]
enum ValidateCommand {
    /// Coverage of the intervals.
    Coverage(ValidateArgs),
    /// Decay of the gap interval radius with the path length.
    Width(ValidateArgs),
    /// Error of the point estimates.
    Accuracy(ValidateArgs),
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    chain: PathBuf,
    #[arg(long)]
    trials: usize,
    /// One path length or a comma-separated increasing grid.
    #[arg(long)]
    steps: String,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; MIXCERT_JOBS takes precedence.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "stationary")]
    init: String,
    /// Also evaluate the combined intervals with this constant.
    #[arg(long)]
    constant: Option<f64>,
}

#[derive(Args)]
struct StopArgs {
    #[arg(long)]
    chain: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_steps: usize,
    #[arg(long, default_value_t = 1.0)]
    constant: f64,
    #[arg(long, default_value = "stationary")]
    init: String,
}

fn emit(value: &impl serde::Serialize, out: Option<&Path>) -> Result<()> {
    let text = to_json_string(value)?;
    match out {
        Some(file) => {
            std::fs::write(file, text).with_context(|| format!("writing {}", file.display()))?
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_chain(file: &Path) -> Result<mixcert::ChainSpec> {
    read_chain(file).with_context(|| format!("reading chain {}", file.display()))
}

fn load_path(file: &Path) -> Result<mixcert::SamplePath> {
    read_path(file).with_context(|| format!("reading path {}", file.display()))
}

fn with_fields(value: &impl serde::Serialize, extra: Value) -> Result<Value> {
    let mut v = serde_json::to_value(value)?;
    if let (Some(map), Value::Object(extra)) = (v.as_object_mut(), extra) {
        map.extend(extra);
    }
    Ok(v)
}

fn make(args: MakeArgs) -> Result<()> {
    let params = FamilyParams {
        d: args.d,
        pibar: args.pibar,
        gammabar: args.gammabar,
        index: args.index,
        beta: args.beta,
    };
    let chain = chain_family(&args.family, &params)?;
    match args.out {
        Some(file) => {
            write_chain(&file, &chain).with_context(|| format!("writing {}", file.display()))?
        }
        None => emit(&mixcert::json::ChainFile::from_chain(&chain), None)?,
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let chain = load_chain(&args.chain)?;
    let init: Init = args.init.parse()?;
    let path = simulate_path(&chain, args.steps, &init, args.seed)?;
    match args.out {
        Some(file) => {
            write_path(&file, &path).with_context(|| format!("writing {}", file.display()))?
        }
        None => std::io::stdout()
            .lock()
            .write_all(mixcert::path::format_path(&path).as_bytes())?,
    }
    Ok(())
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let path = load_path(&args.path)?;
    let stats = collect_statistics(&path)?;
    let plugin = plugin_estimate(&stats)?;
    let value = match args.method {
        Method::Plugin => with_fields(
            &plugin,
            json!({"schema": 1, "method": "plugin", "n": path.len(), "d": path.d()}),
        )?,
        Method::Bootstrap => with_fields(
            &bootstrap_estimate(&path)?,
            json!({
                "schema": 1,
                "method": "bootstrap",
                "n": path.len(),
                "d": path.d(),
                "pimin_hat": plugin.pimin_hat,
            }),
        )?,
    };
    emit(&value, None)
}

fn ci(args: CiArgs) -> Result<()> {
    let path = load_path(&args.path)?;
    let report = if args.combined {
        combined_intervals(&path, args.delta, args.constant)?
    } else {
        algorithm1(&path, args.delta)?.1
    };
    emit(&report, None)
}

fn jobs(flag: usize) -> Result<usize> {
    match std::env::var("MIXCERT_JOBS") {
        Ok(v) => v.trim().parse().map_err(|_| {
            Error::BadParams(format!(
                "MIXCERT_JOBS must be a positive integer, got {v:?}"
            ))
            .into()
        }),
        Err(_) => Ok(flag),
    }
}

/// Path lengths such as `100000` or `1e5,4e5`.
fn parse_grid(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            if let Ok(n) = s.parse::<usize>() {
                return Ok(n);
            }
            match s.parse::<f64>() {
                Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1e18 => Ok(x as usize),
                _ => Err(Error::BadParams(format!("bad path length {s:?}")).into()),
            }
        })
        .collect()
}

fn validate(cmd: ValidateCommand) -> Result<()> {
    let (kind, args) = match cmd {
        ValidateCommand::Coverage(a) => ("coverage", a),
        ValidateCommand::Width(a) => ("width", a),
        ValidateCommand::Accuracy(a) => ("accuracy", a),
    };
    let chain = load_chain(&args.chain)?;
    let cfg = ExperimentConfig {
        trials: args.trials,
        steps: parse_grid(&args.steps)?,
        delta: args.delta,
        master_seed: args.seed,
        init: args.init.parse()?,
        constant: args.constant,
    };
    cfg.validate()
        .map_err(|e| Error::BadParams(e.to_string()))?;
    let jobs = jobs(args.jobs)?.max(1);
    let start = Instant::now();
    match kind {
        "coverage" => emit(&coverage_experiment(&chain, &cfg, jobs)?, None)?,
        "width" => emit(&width_experiment(&chain, &cfg, jobs)?, None)?,
        _ => emit(&accuracy_experiment(&chain, &cfg, jobs)?, None)?,
    }
    let secs = start.elapsed().as_secs_f64();
    eprintln!(
        "{kind}: {} trials x {} lengths on {jobs} thread(s) in {secs:.2} s ({:.3} s/trial)",
        cfg.trials,
        cfg.steps.len(),
        secs / cfg.trials as f64
    );
    Ok(())
}

fn stoprule(args: StopArgs) -> Result<()> {
    let chain = load_chain(&args.chain)?;
    let init: Init = args.init.parse()?;
    let mut source = SimulatedSource::new(&chain, &init, args.seed, args.max_steps)?;
    let trace = stopping_rule(&mut source, args.epsilon, args.delta, args.constant)?;
    let value = with_fields(
        &trace,
        json!({"seed": args.seed, "max_steps": args.max_steps, "init": args.init}),
    )?;
    emit(&value, None)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Chains(ChainsCommand::Make(a)) => make(a),
        Command::Chains(ChainsCommand::List) => {
            for name in FAMILY_NAMES {
                println!("{name}");
            }
            Ok(())
        }
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Ci(a) => ci(a),
        Command::Validate(c) => validate(c),
        Command::Stoprule(a) => stoprule(a),
    }
}

/// 1: I/O or parse, 2: bad arguments, 3: the data does not meet a precondition.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::BadParams(_) | Error::BadInit(_) | Error::Domain(_)) => 2,
        Some(
            Error::PathTooShort { .. }
            | Error::EmptyResult { .. }
            | Error::TooSmall(_)
            | Error::NotErgodic(_)
            | Error::NotReversible(_),
        ) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("mixcert: {err:#}");
            let code = exit_code(&err);
            if code == 2 {
                eprintln!("run `mixcert help` for usage");
            }
            ExitCode::from(code)
        }
    }
}
