//! Batch front-end: JSON config in, RFC-4180 CSV plus a JSON manifest out.

pub mod audit;
pub mod table;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sparse_ldp::risk_engine::{bound_summary, estimate_risk, sweep, SweepAxis, SweepRow};
use sparse_ldp::ExperimentConfig;

pub use audit::AuditConfig;

/// Thread count used when `--threads` is not given.
pub const THREADS_ENV: &str = "SPARSE_LDP_THREADS";

/// Version of the CSV column layouts.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "sparse-ldp", version, about = "Private sparse support recovery: audits, risk estimates, sweeps and bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact privacy and unbiasedness certificates.
    Audit(CommonArgs),
    /// Monte Carlo risk of one configuration.
    Risk(CommonArgs),
    /// Risk and bounds along one parameter axis.
    Sweep(CommonArgs),
    /// Bounds only, at one configuration or along an axis.
    Bounds(CommonArgs),
    /// Table of the hypercube normalizer K_d.
    Kd(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Audit(_) => "audit",
            Command::Risk(_) => "risk",
            Command::Sweep(_) => "sweep",
            Command::Bounds(_) => "bounds",
            Command::Kd(_) => "kd",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Audit(a) | Command::Risk(a) | Command::Sweep(a) | Command::Bounds(a) | Command::Kd(a) => a,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<sparse_ldp::Error> for CliError {
    fn from(e: sparse_ldp::Error) -> Self {
        match e {
            sparse_ldp::Error::QuadratureDiverged { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    CertificateFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::CertificateFailure => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub base: ExperimentConfig,
    #[serde(default)]
    pub axis: Option<SweepAxis>,
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KdConfig {
    #[serde(default)]
    pub d: Option<Vec<usize>>,
    #[serde(default)]
    pub d_min: Option<usize>,
    #[serde(default)]
    pub d_max: Option<usize>,
}

impl KdConfig {
    pub fn dims(&self) -> Result<Vec<usize>, CliError> {
        match (&self.d, self.d_min, self.d_max) {
            (Some(list), None, None) if !list.is_empty() => Ok(list.clone()),
            (None, Some(lo), Some(hi)) if 1 <= lo && lo <= hi => Ok((lo..=hi).collect()),
            _ => Err(CliError::Config(
                "kd config needs either a nonempty `d` list or `d_min <= d_max` (both >= 1)".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_path: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub status: &'static str,
    pub outputs: Vec<String>,
}

/// `results.csv` → `results.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    out.with_extension(suffix)
}

fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// `--threads`, else the environment variable, else every core.
pub fn resolve_threads(flag: Option<usize>) -> Result<usize, CliError> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{THREADS_ENV}={v:?} is not a thread count")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if n == 0 {
        return Err(CliError::Config("thread count must be >= 1".into()));
    }
    Ok(n)
}

fn apply_overrides(cfg: &mut ExperimentConfig, args: &CommonArgs) {
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
}

struct Outcome {
    status: Status,
    config: serde_json::Value,
    seed: Option<u64>,
    outputs: Vec<PathBuf>,
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("configs serialize to JSON")
}

fn sweep_rows_for(base: &ExperimentConfig, axis: Option<SweepAxis>, grid: Option<&[f64]>, with_risk: bool) -> Result<Vec<table::PointRow>, CliError> {
    match (axis, grid) {
        (Some(axis), Some(grid)) => {
            if grid.is_empty() {
                return Err(CliError::Config("grid must be nonempty".into()));
            }
            let rows: Vec<SweepRow> = if with_risk {
                sweep(base, axis, grid)?
            } else {
                grid.iter()
                    .map(|&v| {
                        let mut row = SweepRow {
                            axis,
                            axis_value: v,
                            config: base.clone(),
                            estimate: None,
                            bounds: Default::default(),
                            error: None,
                        };
                        match sparse_ldp::risk_engine::apply_axis(base, axis, v).and_then(|cfg| {
                            row.config = cfg.clone();
                            bound_summary(&cfg)
                        }) {
                            Ok(b) => row.bounds = b,
                            Err(e) => row.error = Some(e.to_string()),
                        }
                        row
                    })
                    .collect()
            };
            Ok(rows.into_iter().map(table::PointRow::from_sweep).collect())
        }
        (None, None) => {
            let bounds = bound_summary(base)?;
            let estimate = if with_risk { Some(estimate_risk(base)?) } else { None };
            Ok(vec![table::PointRow::single(base.clone(), estimate, bounds)])
        }
        _ => Err(CliError::Config("`axis` and `grid` must be given together".into())),
    }
}

fn run_command(command: &Command) -> Result<Outcome, CliError> {
    let args = command.args();
    let out = &args.out;
    match command {
        Command::Audit(_) => {
            let mut cfg: AuditConfig = read_config(&args.config)?;
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            let rows = audit::run(&cfg)?;
            for r in &rows {
                println!(
                    "{} {} {} d={} alpha={} worst={} target={}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.check,
                    r.mechanism,
                    r.d,
                    r.alpha.map_or_else(String::new, table::fmt_f64),
                    table::fmt_f64(r.worst),
                    table::fmt_f64(r.target),
                );
            }
            table::write_audit(out, &rows)?;
            let status = if rows.iter().all(|r| r.pass) {
                Status::Ok
            } else {
                Status::CertificateFailure
            };
            Ok(Outcome {
                status,
                config: to_value(&cfg),
                seed: Some(cfg.seed),
                outputs: vec![out.clone()],
            })
        }
        Command::Risk(_) => {
            let mut cfg: ExperimentConfig = read_config(&args.config)?;
            apply_overrides(&mut cfg, args);
            let rows = sweep_rows_for(&cfg, None, None, true)?;
            table::write_points(out, &rows)?;
            let trials_path = sibling(out, "trials.csv");
            let losses = rows[0]
                .estimate
                .as_ref()
                .and_then(|e| e.per_trial_losses.clone())
                .unwrap_or_default();
            table::write_trials(&trials_path, &losses)?;
            Ok(Outcome {
                status: Status::Ok,
                seed: Some(cfg.seed),
                config: to_value(&cfg),
                outputs: vec![out.clone(), trials_path],
            })
        }
        Command::Sweep(_) => {
            let mut cfg: SweepConfig = read_config(&args.config)?;
            apply_overrides(&mut cfg.base, args);
            let rows = sweep_rows_for(&cfg.base, Some(cfg.axis), Some(&cfg.grid), true)?;
            table::write_points(out, &rows)?;
            Ok(Outcome {
                status: Status::Ok,
                seed: Some(cfg.base.seed),
                config: to_value(&cfg),
                outputs: vec![out.clone()],
            })
        }
        Command::Bounds(_) => {
            let mut cfg: BoundsConfig = read_config(&args.config)?;
            apply_overrides(&mut cfg.base, args);
            let rows = sweep_rows_for(&cfg.base, cfg.axis, cfg.grid.as_deref(), false)?;
            table::write_points(out, &rows)?;
            Ok(Outcome {
                status: Status::Ok,
                seed: None,
                config: to_value(&cfg),
                outputs: vec![out.clone()],
            })
        }
        Command::Kd(_) => {
            let cfg: KdConfig = read_config(&args.config)?;
            table::write_kd(out, &cfg.dims()?)?;
            Ok(Outcome {
                status: Status::Ok,
                seed: None,
                config: to_value(&cfg),
                outputs: vec![out.clone()],
            })
        }
    }
}

/// Runs one command inside a pool of the resolved size and writes its manifest.
pub fn execute(command: &Command) -> Result<Status, CliError> {
    let args = command.args();
    let threads = resolve_threads(args.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let start = Instant::now();
    let outcome = pool.install(|| run_command(command))?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool: "sparse-ldp",
        version: env!("CARGO_PKG_VERSION"),
        command: command.name(),
        config_path: args.config.display().to_string(),
        config: outcome.config,
        seed: outcome.seed,
        threads,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        status: match outcome.status {
            Status::Ok => "ok",
            Status::CertificateFailure => "certificate_failure",
        },
        outputs: outcome.outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = manifest_path(&args.out);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))?;
    Ok(outcome.status)
}

/// Parses `argv`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("sparse-ldp {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
