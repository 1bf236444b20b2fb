//! Batch scenario runner for the lattice Dirac-sea experiments.
//!
//! Every run writes its tables, a `report.json` and a `manifest.json` into
//! the output directory. Exit status: 0 ok, 1 configuration error, 2
//! numerical invariant violation.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::Value;

use commands::Report;
use config::ScenarioConfig;
use output::{num, RunOutput};

#[derive(Parser, Debug)]
#[command(name = "dirac-lab", version, about = "Lattice Dirac-sea vacuum experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON scenario configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's "out", default "out".
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Parallel sweep points.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Seed for randomized test vectors; overrides the config's "seed".
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Mode table and basis identities.
    CheckBasis,
    /// Vacuum commutator kernel table and divergence report.
    Schwinger,
    /// Determinant evolution, optionally under a gauge kick.
    Evolve,
    /// Gauge-kick energy sweep over kick strengths.
    ExtractEnergy,
    /// First-order current by direct and gauge-variation paths.
    Response,
    /// Oracle suite for the configured lattice.
    Verify,
    /// Runs the experiment named in "sweep" over a parameter grid.
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::CheckBasis => "check-basis",
            Command::Schwinger => "schwinger",
            Command::Evolve => "evolve",
            Command::ExtractEnergy => "extract-energy",
            Command::Response => "response",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        }
    }

    fn from_name(name: &str) -> Option<Command> {
        [
            Command::CheckBasis,
            Command::Schwinger,
            Command::Evolve,
            Command::ExtractEnergy,
            Command::Response,
            Command::Verify,
        ]
        .into_iter()
        .find(|c| c.name() == name.replace('_', "-"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    Config,
    Invariant,
}

/// Single-line error with its exit status.
#[derive(Clone, Debug)]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Config,
            message: message.into(),
        }
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Invariant,
            message: message.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self.kind {
            FailureKind::Config => 1,
            FailureKind::Invariant => 2,
        }
    }

    fn line(&self) -> String {
        let kind = match self.kind {
            FailureKind::Config => "config",
            FailureKind::Invariant => "invariant",
        };
        format!("error[{kind}]: {}", self.message.replace(['\n', '\r'], " "))
    }
}

impl From<dirac_lab::Error> for Failure {
    fn from(e: dirac_lab::Error) -> Self {
        match e {
            dirac_lab::Error::Invariant(_) => Failure::invariant(e.to_string()),
            _ => Failure::config(e.to_string()),
        }
    }
}

fn run_single(command: Command, cfg: &ScenarioConfig, echo: &Value, dir: &Path, seed: u64) -> Result<Value, Failure> {
    cfg.validate_for(command.name())?;
    let mut out = RunOutput::create(dir)?;
    let report: Report = match command {
        Command::CheckBasis => commands::check_basis(cfg, &mut out)?,
        Command::Schwinger => commands::schwinger(cfg, &mut out)?,
        Command::Evolve => commands::run_evolve(cfg, &mut out)?,
        Command::ExtractEnergy => commands::run_extract_energy(cfg, &mut out)?,
        Command::Response => commands::run_response(cfg, &mut out)?,
        Command::Verify => commands::verify(cfg, seed, &mut out)?,
        Command::Sweep => unreachable!("sweep points name a concrete experiment"),
    };
    out.write_json("report.json", &report.value)?;
    out.finish(command.name(), echo, seed)?;
    match report.violation {
        Some(v) => Err(Failure::invariant(v)),
        None => Ok(report.value),
    }
}

fn run_sweep(cfg: &ScenarioConfig, echo: &Value, dir: &Path, seed: u64, jobs: usize) -> Result<(), Failure> {
    let sweep = cfg.require(&cfg.sweep, "sweep", "sweep")?;
    let experiment = Command::from_name(&sweep.experiment)
        .ok_or_else(|| Failure::config(format!("sweep experiment \"{}\" is not a runnable subcommand", sweep.experiment)))?;
    if sweep.n.is_empty() {
        return Err(Failure::config("sweep needs at least one N"));
    }
    let masses = sweep.m.clone().unwrap_or_else(|| vec![cfg.lattice.mass]);
    let mut points = Vec::new();
    for &n in &sweep.n {
        for &m in &masses {
            let mut p = cfg.clone();
            p.sweep = None;
            p.experiment = None;
            p.lattice.site_count = n;
            p.lattice.mass = m;
            if let Some(ratio) = sweep.band_ratio {
                p.vacuum = Some("band".into());
                p.delta_ew = Some(ratio * (p.lattice.e_max() - m));
            }
            points.push(p);
        }
    }
    let mut out = RunOutput::create(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
    let results: Vec<Result<Value, Failure>> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let point_echo = serde_json::to_value(p).expect("config serializes");
                run_single(experiment, p, &point_echo, &dir.join(format!("point_{i:03}")), seed)
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut worst: Option<Failure> = None;
    for (i, (p, r)) in points.iter().zip(&results).enumerate() {
        let (status, detail) = match r {
            Ok(v) => ("0".to_string(), v.to_string()),
            Err(f) => {
                if worst.as_ref().is_none_or(|w| f.exit_code() > w.exit_code()) {
                    worst = Some(f.clone());
                }
                (f.exit_code().to_string(), f.line())
            }
        };
        rows.push(vec![
            format!("point_{i:03}"),
            p.lattice.site_count.to_string(),
            num(p.lattice.mass),
            p.vacuum.clone().unwrap_or_else(|| "standard".into()),
            p.delta_ew.map(num).unwrap_or_default(),
            status,
            detail,
        ]);
    }
    out.write_csv("sweep.csv", &["point", "N", "m", "vacuum", "ΔE_w", "exit_status", "report"], &rows)?;
    out.finish("sweep", echo, seed)?;
    match worst {
        Some(f) => Err(Failure {
            kind: f.kind,
            message: format!("sweep point failed: {}", f.message),
        }),
        None => Ok(()),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::config("--config <path> is required"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    let cfg = ScenarioConfig::parse(&text)?;
    let echo: Value = serde_json::from_str(&text).map_err(|e| Failure::config(format!("config JSON: {e}")))?;
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    if cli.jobs == 0 {
        return Err(Failure::config("--jobs must be at least 1"));
    }
    match cli.command {
        Command::Sweep => {
            cfg.lattice.validate()?;
            run_sweep(&cfg, &echo, &dir, seed, cli.jobs)
        }
        c => run_single(c, &cfg, &echo, &dir, seed).map(|_| ()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.exit_code())
        }
    }
}
