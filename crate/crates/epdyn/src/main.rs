//! Command-line driver: a JSON scenario in, a CSV or JSON artifact out.
//!
//! Exit codes: 0 ok, 2 config error, 3 numerical failure. Errors are printed to
//! stderr as one JSON object.

mod config;
mod output;
mod tasks;

use clap::{Args, Parser, Subcommand};
use config::{ScenarioConfig, Task};
use output::Provenance;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(epcore::Error),
}

impl From<epcore::Error> for CliError {
    fn from(e: epcore::Error) -> Self {
        use epcore::Error::*;
        match e {
            InvalidParameters(_) | DimensionMismatch(_) | ScenarioMismatch(_) | NotPsd(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        let (kind, message) = match self {
            CliError::Config(m) => ("config", m.clone()),
            CliError::Numerical(e) => ("numerical", e.to_string()),
        };
        serde_json::json!({ "error": { "kind": kind, "message": message, "exit_code": self.exit_code() } })
    }
}

#[derive(Parser)]
#[command(name = "epdyn", version, about = "Exceptional-point scenarios: spectra, PCR checks, dynamics and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for randomized tasks (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative rank threshold (overrides the config).
    #[arg(long, global = true)]
    rank_tol: Option<f64>,
    /// Absolute eigenvalue clustering radius (overrides the config).
    #[arg(long, global = true)]
    cluster_tol: Option<f64>,
    /// Output file (default: the config's `output`, else stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConfigArg {
    /// Scenario config (JSON).
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Sorted eigenvalues per sweep point.
    SpectrumSweep(ConfigArg),
    /// Mean Petermann factor and its inverse per sweep point.
    PetermannSweep(ConfigArg),
    /// Jordan structure and PCR residuals (JSON report).
    PcrCheck(ConfigArg),
    /// Closed-form (or oracle) state evolution: populations, norm, fidelity to the asymptotic direction.
    Evolve(ConfigArg),
    /// Density-matrix evolution of one diagonal mixed state or a seeded ensemble.
    DensityEvolve(ConfigArg),
    /// Diamond-ring entanglement transfer fidelities.
    Transfer(ConfigArg),
    /// Full coupled-mode dynamics against the eliminated models.
    EliminateCompare(ConfigArg),
}

impl Command {
    fn split(&self) -> (Task, &Path) {
        let (t, a) = match self {
            Command::SpectrumSweep(a) => (Task::SpectrumSweep, a),
            Command::PetermannSweep(a) => (Task::PetermannSweep, a),
            Command::PcrCheck(a) => (Task::PcrCheck, a),
            Command::Evolve(a) => (Task::Evolve, a),
            Command::DensityEvolve(a) => (Task::DensityEvolve, a),
            Command::Transfer(a) => (Task::Transfer, a),
            Command::EliminateCompare(a) => (Task::EliminateCompare, a),
        };
        (t, &a.config)
    }
}

fn sha256_hex(s: &str) -> String {
    Sha256::digest(s.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let (task, path) = cli.command.split();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut cfg = ScenarioConfig::parse(&text, &base)?;
    if let Some(t) = cfg.task {
        if t != task {
            return Err(CliError::Config(format!("config task `{}` does not match subcommand `{}`", t.name(), task.name())));
        }
    }
    cfg.task = Some(task);
    cfg.absolutize_paths()?;
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.rank_tol.is_some() {
        cfg.tolerances.rank_tol = cli.rank_tol;
    }
    if cli.cluster_tol.is_some() {
        cfg.tolerances.cluster_tol = cli.cluster_tol;
    }
    if let Some(o) = &cli.out {
        cfg.output = Some(o.clone());
    }
    cfg.validate()?;
    let artifact = tasks::run(&cfg, task)?;
    let hash = sha256_hex(&cfg.hash_input());
    let tolerances = serde_json::to_string(&cfg.tolerances).expect("overrides serialize");
    let rendered = artifact.render(&Provenance { task: task.name(), config_sha256: &hash, tolerances: &tolerances });
    match &cfg.output {
        Some(out) => {
            // Relative outputs from a config file resolve against the working directory.
            write_file(out, &rendered)?;
            let mut eff = out.clone().into_os_string();
            eff.push(".config.json");
            write_file(Path::new(&eff), &cfg.effective_json())?;
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
