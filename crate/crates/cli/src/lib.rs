//! Command implementations behind the `privforge` binary.
//!
//! Each command returns its standard-output text so it can be exercised
//! without spawning a process. Exit codes: 0 on success, 2 for input and
//! format errors, 3 when the model is infeasible (the user queries a
//! category the population never does).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use privforge_core::export::{curve_csv, format_sig, round_sig, SIGNIFICANT_DIGITS};
use privforge_core::stream::{write_jsonl, SimulationFile};
use privforge_core::types_lab::type_reports;
use privforge_core::{
    certify, convergence_report, critical_redundancy, estimate_profile, generate_stream,
    linear_grid, solve, tradeoff_curve, CategoryCounts, Profile, Redundancy, SolveReport,
    TradeoffPoint,
};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Infeasible(_) => 3,
        }
    }
}

impl From<privforge_core::Error> for CliError {
    fn from(err: privforge_core::Error) -> Self {
        match err {
            privforge_core::Error::UnsupportedCategory(_) => CliError::Infeasible(err.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "privforge", version, about = "Query-forgery privacy toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal forged profile and minimum risk at one redundancy.
    Solve(SolveArgs),
    /// Privacy-redundancy curve over a grid.
    Curve(CurveArgs),
    /// Smallest redundancy that drives the risk to zero.
    RhoCrit(PairArgs),
    /// Simulate a mixed query stream and report what an attacker sees.
    Simulate(SimulateArgs),
    /// Method-of-types report for every type of k draws.
    Types(TypesArgs),
    /// Relative-frequency profile from category counts.
    Estimate(EstimateArgs),
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// User profile JSON.
    #[arg(long)]
    pub user: PathBuf,
    /// Population profile JSON.
    #[arg(long)]
    pub population: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub profiles: PairArgs,
    #[arg(long)]
    pub rho: f64,
    /// Iterations for the exponentiated-gradient cross-check; 0 skips it.
    #[arg(long, default_value_t = 100_000)]
    pub oracle_iterations: u32,
    /// Seed of the cross-check's starting point.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub profiles: PairArgs,
    /// Grid as `start:stop:steps`, endpoints included.
    #[arg(long)]
    pub grid: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation config JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Population profile JSON; overrides `p` in the config.
    #[arg(long)]
    pub population: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the event stream as JSON Lines.
    #[arg(long)]
    pub stream: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TypesArgs {
    /// Alphabet size; inferred from `--tbar` when omitted.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of draws.
    #[arg(long)]
    pub k: u64,
    /// Reference profile JSON; uniform when omitted.
    #[arg(long)]
    pub tbar: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Category counts JSON.
    #[arg(long)]
    pub counts: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Runs a parsed command, writing its result to `--output` or stdout.
pub fn run(cli: Cli) -> CliResult<()> {
    let (text, output) = match cli.command {
        Command::Solve(args) => (cmd_solve(&args)?, args.output),
        Command::Curve(args) => (cmd_curve(&args)?, args.output),
        Command::RhoCrit(args) => (cmd_rho_crit(&args)?, None),
        Command::Simulate(args) => (cmd_simulate(&args)?, args.output),
        Command::Types(args) => (cmd_types(&args)?, args.output),
        Command::Estimate(args) => (cmd_estimate(&args)?, args.output),
    };
    emit(&text, output.as_deref())
}

fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Input(format!("cannot write output: {e}")))
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_pair(args: &PairArgs) -> CliResult<(Profile, Profile)> {
    let q: Profile = read_json(&args.user)?;
    let p: Profile = read_json(&args.population)?;
    if !q.is_aligned_with(&p) {
        return Err(CliError::Input(
            "user and population profiles list different categories".into(),
        ));
    }
    Ok((q, p))
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut value =
        serde_json::to_value(value).map_err(|e| CliError::Input(format!("serialization: {e}")))?;
    round_floats(&mut value);
    let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
    text.push('\n');
    Ok(text)
}

fn round_floats(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"), SIGNIFICANT_DIGITS);
            *value = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

#[derive(Serialize)]
struct SolveOutput {
    #[serde(flatten)]
    point: TradeoffPoint,
    report: SolveReport,
}

pub fn cmd_solve(args: &SolveArgs) -> CliResult<String> {
    let (q, p) = read_pair(&args.profiles)?;
    let rho = Redundancy::new(args.rho)?;
    let point = solve(&q, &p, rho)?;
    let report = if args.oracle_iterations > 0 {
        certify(&q, &p, rho, &point, args.oracle_iterations, args.seed)?
    } else {
        privforge_core::verify_kkt(&q, &p, rho, &point)
    };
    to_json(&SolveOutput { point, report })
}

/// Parses `start:stop:steps`.
pub fn parse_grid(text: &str) -> CliResult<Vec<Redundancy>> {
    let bad = || CliError::Input(format!("grid `{text}` is not start:stop:steps"));
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, steps] = parts[..] else {
        return Err(bad());
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
    let steps: usize = steps.trim().parse().map_err(|_| bad())?;
    Ok(linear_grid(start, stop, steps)?)
}

pub fn cmd_curve(args: &CurveArgs) -> CliResult<String> {
    let grid = parse_grid(&args.grid)?;
    let (q, p) = read_pair(&args.profiles)?;
    let curve = tradeoff_curve(&q, &p, &grid)?;
    match args.format {
        Format::Csv => Ok(curve_csv(&curve)),
        Format::Json => to_json(&curve),
    }
}

pub fn cmd_rho_crit(args: &PairArgs) -> CliResult<String> {
    let (q, p) = read_pair(args)?;
    let crit = critical_redundancy(&q, &p)?;
    let unsupported = q.pmf().iter().zip(p.pmf()).any(|(&qi, &pi)| qi > 0.0 && pi == 0.0);
    if unsupported {
        eprintln!("warning: the user queries categories the population never does; zero risk is unattainable");
    }
    Ok(format!("{}\n", format_sig(crit, SIGNIFICANT_DIGITS)))
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<String> {
    let mut file: SimulationFile = read_json(&args.config)?;
    if let Some(path) = &args.population {
        file.p = Some(read_json(path)?);
    }
    if let Some(seed) = args.seed {
        file.seed = seed;
    }
    let (cfg, p) = file.resolve()?;
    let p = p.ok_or_else(|| {
        CliError::Input("a population profile is required (config `p` or --population)".into())
    })?;
    let events = generate_stream(&cfg);
    if let Some(path) = &args.stream {
        let out = fs::File::create(path)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        write_jsonl(&events, cfg.q.categories(), io::BufWriter::new(out))
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    let report = convergence_report(&events, &cfg.q, &cfg.r, cfg.rho, &p)?;
    to_json(&report)
}

pub fn cmd_types(args: &TypesArgs) -> CliResult<String> {
    let tbar = match (&args.tbar, args.n) {
        (Some(path), n) => {
            let tbar: Profile = read_json(path)?;
            if n.is_some_and(|n| n != tbar.len()) {
                return Err(CliError::Input(format!(
                    "--n {} does not match the {} categories of the reference profile",
                    n.unwrap_or_default(),
                    tbar.len()
                )));
            }
            tbar
        }
        (None, Some(n)) => Profile::uniform_indexed(n)?,
        (None, None) => return Err(CliError::Input("either --n or --tbar is required".into())),
    };
    to_json(&type_reports(&tbar, args.k)?)
}

pub fn cmd_estimate(args: &EstimateArgs) -> CliResult<String> {
    let counts: CategoryCounts = read_json(&args.counts)?;
    to_json(&estimate_profile(&counts)?)
}
