//! Command-line front end.
//!
//! Every command echoes its full flag set in the output so a run can be
//! reproduced from its own file. CSV floats use 17 significant digits; JSON
//! output is a single object with `schema_version`, `command`, `parameters`
//! and `results`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::chain::stationary_distribution;
use crate::diffusion::{
    build_potential, deviation_measure, mean_exit_time, simulate_sde, DeviationExperiment,
    Reference, DEFAULT_MAX_EXIT_STEPS,
};
use crate::error::Error;
use crate::montecarlo::{estimate_spa, simulate_replica, SimConfig, DEFAULT_BURN_IN};
use crate::params::{ChainParams, NoiseLevel};
use crate::spectral::spa_closed_form;
use crate::tuning::{classify, p_minus, tuning_report, Region};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Degenerate(String),
    #[error("{0}")]
    BlowUp(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Io(_) => 3,
            CliError::Degenerate(_) => 4,
            CliError::BlowUp(_) => 5,
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::DegenerateChain { .. } => CliError::Degenerate(err.to_string()),
            Error::BlowUp { .. } => CliError::BlowUp(err.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "srchain",
    version,
    about = "Stochastic resonance in periodically switched two-state chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// SPA coefficient on a uniform grid of noise intensities.
    SpaCurve(SpaCurveArgs),
    /// Region, resonance point, zero and asymptotics for one parameter set.
    Tune(TuneArgs),
    /// Boundary curve p_minus(q) and a classification grid over (p, q).
    Regions(RegionsArgs),
    /// Periodic stationary law, one row per phase.
    Stationary(StationaryArgs),
    /// Monte Carlo estimate of the SPA coefficient.
    Simulate(SimulateArgs),
    /// Deviation measure of switched double-well diffusion paths.
    Diffusion(DiffusionArgs),
    /// Mean exit time from the shallow well of the static potential.
    ExitTime(ExitTimeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JsonFormat {
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    /// Depth of the shallow well.
    #[serde(rename = "v")]
    #[arg(long = "v", default_value_t = 2.0)]
    pub shallow: f64,
    /// Depth of the deep well.
    #[serde(rename = "V")]
    #[arg(long = "V", default_value_t = 4.0)]
    pub deep: f64,
    /// Half-period m.
    #[arg(long, default_value_t = 500)]
    pub m: u64,
}

impl ChainArgs {
    fn params(&self) -> CliResult<ChainParams> {
        Ok(ChainParams::new(
            self.p,
            self.q,
            self.shallow,
            self.deep,
            self.m,
        )?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpaCurveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainArgs,
    #[arg(long, default_value_t = 0.3)]
    pub eps_min: f64,
    #[arg(long, default_value_t = 1.2)]
    pub eps_max: f64,
    #[arg(long, default_value_t = 181)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TuneArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainArgs,
    #[arg(long, value_enum, default_value_t = JsonFormat::Json)]
    pub format: JsonFormat,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RegionsArgs {
    /// Depth ratio v/V.
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, default_value_t = 1)]
    pub m: u64,
    /// Points per axis on [0, 1].
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StationaryArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainArgs,
    /// Noise intensity; `inf` is accepted.
    #[arg(long)]
    #[serde(serialize_with = "float_or_tag")]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainArgs,
    #[arg(long, default_value_t = 0.65)]
    #[serde(serialize_with = "float_or_tag")]
    pub eps: f64,
    #[arg(long, default_value_t = 10_000)]
    pub periods: u64,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    pub burn_in: u64,
    #[arg(long, default_value_t = 16)]
    pub replicas: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the first replica's path as `k,state` CSV rows.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = JsonFormat::Json)]
    pub format: JsonFormat,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceArg {
    Sign,
    Phase,
}

impl From<ReferenceArg> for Reference {
    fn from(r: ReferenceArg) -> Self {
        match r {
            ReferenceArg::Sign => Reference::SignX0,
            ReferenceArg::Phase => Reference::Phase,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiffusionArgs {
    #[serde(rename = "v")]
    #[arg(long = "v", default_value_t = 1.0)]
    pub shallow: f64,
    #[serde(rename = "V")]
    #[arg(long = "V", default_value_t = 2.0)]
    pub deep: f64,
    #[arg(long, default_value_t = 1.5)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.45)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, value_enum, default_value_t = ReferenceArg::Phase)]
    pub reference: ReferenceArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of consecutive seeds starting at `--seed`.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// Override the period exp(lambda/eps); at eps = 0 the period
    /// defaults to 10 time units.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, value_enum, default_value_t = JsonFormat::Json)]
    pub format: JsonFormat,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExitTimeArgs {
    #[serde(rename = "v")]
    #[arg(long = "v", default_value_t = 1.0)]
    pub shallow: f64,
    #[serde(rename = "V")]
    #[arg(long = "V", default_value_t = 2.0)]
    pub deep: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Step cap per path; paths reaching it are counted as timeouts.
    #[arg(long, default_value_t = DEFAULT_MAX_EXIT_STEPS)]
    pub max_steps: u64,
    #[arg(long, value_enum, default_value_t = JsonFormat::Json)]
    pub format: JsonFormat,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

fn float_or_tag<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Serialize)]
struct Envelope<'a, P: Serialize, R: Serialize> {
    schema_version: &'static str,
    command: &'a str,
    parameters: &'a P,
    results: R,
}

fn json_document<P: Serialize, R: Serialize>(
    command: &str,
    parameters: &P,
    results: R,
) -> CliResult<String> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        parameters,
        results,
    };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

fn csv_document(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Writes `text` to `path` through a temporary file in the same directory,
/// so a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, text: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

fn emit(output: &OutputArgs, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match &output.out {
        Some(path) => write_atomic(path, text),
        None => {
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn noise(eps: f64) -> CliResult<NoiseLevel> {
    Ok(NoiseLevel::from_eps(eps)?)
}

fn spa_curve(args: &SpaCurveArgs) -> CliResult<String> {
    let params = args.chain.params()?;
    if !(args.eps_min >= 0.0 && args.eps_min < args.eps_max && args.eps_max.is_finite()) {
        return Err(CliError::Invalid(format!(
            "need 0 <= eps-min < eps-max < inf, got [{}, {}]",
            args.eps_min, args.eps_max
        )));
    }
    if args.points < 2 {
        return Err(CliError::Invalid(format!(
            "points must be >= 2, got {}",
            args.points
        )));
    }
    let step = (args.eps_max - args.eps_min) / (args.points - 1) as f64;
    let mut rows = Vec::with_capacity(args.points);
    for i in 0..args.points {
        let eps = if i + 1 == args.points {
            args.eps_max
        } else {
            args.eps_min + step * i as f64
        };
        let level = noise(eps)?;
        rows.push((eps, level.x(), spa_closed_form(&params, level).eta));
    }
    match args.format {
        Format::Csv => Ok(csv_document(
            &["eps", "x", "eta"],
            rows.iter()
                .map(|&(e, x, h)| vec![fmt_float(e), fmt_float(x), fmt_float(h)]),
        )),
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                eps: f64,
                x: f64,
                eta: f64,
            }
            let rows: Vec<Row> = rows
                .into_iter()
                .map(|(eps, x, eta)| Row { eps, x, eta })
                .collect();
            json_document("spa-curve", args, serde_json::json!({ "rows": rows }))
        }
    }
}

fn tune(args: &TuneArgs) -> CliResult<String> {
    let params = args.chain.params()?;
    let report = tuning_report(&params)?;
    json_document("tune", args, report)
}

/// One row of the `regions` table: either a boundary sample or a grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionRow {
    pub kind: &'static str,
    pub q: f64,
    pub p: Option<f64>,
    pub p_minus: Option<f64>,
    pub discriminant: Option<f64>,
    pub region: Option<Region>,
}

pub fn region_rows(beta: f64, m: u64, grid: usize) -> CliResult<Vec<RegionRow>> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(CliError::Invalid(format!(
            "beta must lie in (0, 1), got {beta}"
        )));
    }
    if m == 0 {
        return Err(CliError::Invalid("m must be >= 1".into()));
    }
    if grid < 2 {
        return Err(CliError::Invalid(format!("grid must be >= 2, got {grid}")));
    }
    let axis: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();
    let mut rows = Vec::with_capacity(grid * (grid + 1));
    for &q in &axis {
        let b = p_minus(q, beta, m)?;
        rows.push(RegionRow {
            kind: "boundary",
            q,
            p: None,
            p_minus: b.p_minus,
            discriminant: Some(b.discriminant),
            region: None,
        });
    }
    let cells: Vec<RegionRow> = axis
        .par_iter()
        .flat_map_iter(|&q| {
            axis.iter().map(move |&p| {
                let region = if p + q == 0.0 {
                    Region::U0
                } else {
                    let params = ChainParams::new(p, q, beta, 1.0, m).expect("grid point is valid");
                    classify(&params).region
                };
                RegionRow {
                    kind: "grid",
                    q,
                    p: Some(p),
                    p_minus: None,
                    discriminant: None,
                    region: Some(region),
                }
            })
        })
        .collect();
    rows.extend(cells);
    Ok(rows)
}

fn regions(args: &RegionsArgs) -> CliResult<String> {
    let rows = region_rows(args.beta, args.m, args.grid)?;
    match args.format {
        Format::Csv => Ok(csv_document(
            &["kind", "q", "p", "p_minus", "discriminant", "region"],
            rows.iter().map(|r| {
                vec![
                    r.kind.to_string(),
                    fmt_float(r.q),
                    fmt_opt(r.p),
                    fmt_opt(r.p_minus),
                    fmt_opt(r.discriminant),
                    r.region.map(|g| g.to_string()).unwrap_or_default(),
                ]
            }),
        )),
        Format::Json => json_document("regions", args, serde_json::json!({ "rows": rows })),
    }
}

fn stationary(args: &StationaryArgs) -> CliResult<String> {
    if args.chain.p == 0.0 && args.chain.q == 0.0 {
        return Err(Error::DegenerateChain { phi: 0.0, psi: 0.0 }.into());
    }
    let params = args.chain.params()?;
    if !(args.eps > 0.0) {
        return Err(CliError::Invalid(format!(
            "eps must be > 0, got {}",
            args.eps
        )));
    }
    let dist = stationary_distribution(&params, noise(args.eps)?)?;
    match args.format {
        Format::Csv => Ok(csv_document(
            &["l", "pi_minus", "pi_plus"],
            (0..dist.len()).map(|l| {
                vec![
                    l.to_string(),
                    fmt_float(dist.pi_minus(l)),
                    fmt_float(dist.pi_plus(l)),
                ]
            }),
        )),
        Format::Json => {
            let rows: Vec<_> = (0..dist.len())
                .map(|l| serde_json::json!({ "l": l, "pi_minus": dist.pi_minus(l), "pi_plus": dist.pi_plus(l) }))
                .collect();
            json_document("stationary", args, serde_json::json!({ "rows": rows }))
        }
    }
}

fn simulate(args: &SimulateArgs) -> CliResult<String> {
    let params = args.chain.params()?;
    let level = noise(args.eps)?;
    let config = SimConfig::new(args.seed, args.periods, args.burn_in, args.replicas)?;
    let estimate = estimate_spa(&params, level, &config)?;
    if let Some(path) = &args.trace {
        let path_states = simulate_replica(&params, level, &config, 0)?;
        let mut text = String::from("k,state\n");
        for (k, s) in path_states.states.iter().enumerate() {
            let _ = writeln!(text, "{k},{s}");
        }
        write_atomic(path, &text)?;
    }
    let closed = spa_closed_form(&params, level).eta;
    json_document(
        "simulate",
        args,
        serde_json::json!({
            "eta_hat": estimate.eta_hat,
            "std_error": estimate.std_error,
            "n_windows": estimate.n_windows,
            "mean_window_power": estimate.mean_window_power,
            "eta_closed_form": closed,
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSummary {
    pub seed: u64,
    pub measure: f64,
    pub x_final: f64,
    pub x_min: f64,
    pub x_max: f64,
}

fn quantile(sorted: &[f64], prob: f64) -> f64 {
    let pos = prob * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn diffusion(args: &DiffusionArgs) -> CliResult<String> {
    let spec = build_potential(args.shallow, args.deep)?;
    if args.seeds == 0 {
        return Err(CliError::Invalid("seeds must be >= 1".into()));
    }
    let mut base = DeviationExperiment::new(
        args.lambda,
        args.eps,
        args.dt,
        args.delta,
        args.x0,
        args.seed,
        args.reference.into(),
    )?;
    if let Some(h) = args.horizon {
        base = base.with_horizon(h)?;
    }
    let summaries: Vec<PathSummary> = (0..args.seeds)
        .into_par_iter()
        .map(|i| {
            let exp = DeviationExperiment {
                seed: args.seed.wrapping_add(i),
                ..base
            };
            let path = simulate_sde(&spec, &exp)?;
            let (lo, hi) = path
                .values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                    (a.min(v), b.max(v))
                });
            Ok(PathSummary {
                seed: exp.seed,
                measure: deviation_measure(&path, &exp),
                x_final: *path.values.last().expect("path is non-empty"),
                x_min: lo,
                x_max: hi,
            })
        })
        .collect::<crate::error::Result<_>>()?;
    let mut measures: Vec<f64> = summaries.iter().map(|s| s.measure).collect();
    measures.sort_by(f64::total_cmp);
    json_document(
        "diffusion",
        args,
        serde_json::json!({
            "horizon": base.horizon,
            "steps": base.steps(),
            "median_measure": quantile(&measures, 0.5),
            "quantiles": {
                "q10": quantile(&measures, 0.1),
                "q25": quantile(&measures, 0.25),
                "q75": quantile(&measures, 0.75),
                "q90": quantile(&measures, 0.9),
            },
            "paths": summaries,
        }),
    )
}

fn exit_time(args: &ExitTimeArgs) -> CliResult<String> {
    let spec = build_potential(args.shallow, args.deep)?;
    let est = mean_exit_time(
        &spec,
        args.eps,
        args.dt,
        args.seed,
        args.paths,
        args.max_steps,
    )?;
    json_document("exit-time", args, est)
}

/// Runs a parsed command, writing its document to `--out` or `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let (text, output) = match &cli.command {
        Command::SpaCurve(a) => (spa_curve(a)?, &a.output),
        Command::Tune(a) => (tune(a)?, &a.output),
        Command::Regions(a) => (regions(a)?, &a.output),
        Command::Stationary(a) => (stationary(a)?, &a.output),
        Command::Simulate(a) => (simulate(a)?, &a.output),
        Command::Diffusion(a) => (diffusion(a)?, &a.output),
        Command::ExitTime(a) => (exit_time(a)?, &a.output),
    };
    emit(output, &text, stdout)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("srchain: {e}");
            e.exit_code()
        }
    }
}
