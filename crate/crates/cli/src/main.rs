#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use config::ExperimentConfig;
use output::{write_file, Output};

#[derive(Parser, Debug)]
#[command(
    name = "fracavg",
    version,
    about = "Averaged control experiments for time-fractional Schrodinger equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $FRACAVG_OUTPUT_DIR, then ./fracavg-out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized restarts
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    steps: Option<usize>,
    #[arg(long, global = true)]
    modes: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// E_{α,β}(is) on a parameter grid
    MlEval,
    /// Fractional characteristic function of the law
    FcfScan,
    /// Grid evidence for the decay class of the law
    ClassCheck,
    /// One realization of the controlled dynamics
    Forward,
    /// Averaged controlled dynamics
    Average,
    /// Rademacher average against the biharmonic flow
    BiharmonicCheck,
    /// Spectral inequality constant on the sensor
    SpectralConstant,
    /// Mode integrals of the averaged kernel
    ExactnessScan,
    /// Values of ξ steering the state to zero
    ZeroScan,
    /// Averaged null control by the Gramian method
    HumControl,
    /// Invariant suite
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::MlEval => "ml-eval",
            Command::FcfScan => "fcf-scan",
            Command::ClassCheck => "class-check",
            Command::Forward => "forward",
            Command::Average => "average",
            Command::BiharmonicCheck => "biharmonic-check",
            Command::SpectralConstant => "spectral-constant",
            Command::ExactnessScan => "exactness-scan",
            Command::ZeroScan => "zero-scan",
            Command::HumControl => "hum-control",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    /// Verification checks that ran but did not pass.
    ChecksFailed(Vec<String>),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) | CliError::ChecksFailed(_) => 2,
        }
    }

    fn status(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation_error",
            CliError::Io(_) => "io_error",
            CliError::Numerical(_) => "numerical_error",
            CliError::ChecksFailed(_) => "checks_failed",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) | CliError::Io(m) => f.write_str(m),
            CliError::ChecksFailed(names) => write!(f, "failed checks: {}", names.join(", ")),
        }
    }
}

impl From<fracavg_core::Error> for CliError {
    fn from(e: fracavg_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(s) = cli.steps {
        cfg.steps = s;
    }
    if let Some(m) = cli.modes {
        cfg.modes = m;
    }
    Ok(cfg)
}

fn output_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os("FRACAVG_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("fracavg-out"))
}

fn hash(v: &Value) -> String {
    Sha256::digest(v.to_string().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn write_outputs(dir: &Path, out: &Output) -> Result<Vec<String>, CliError> {
    let mut names = Vec::new();
    for t in &out.tables {
        let name = format!("{}.csv", t.name);
        write_file(dir, &name, &t.render())?;
        names.push(name);
    }
    for (name, doc) in &out.documents {
        let text = serde_json::to_string_pretty(doc).expect("JSON values serialize");
        write_file(dir, name, &text)?;
        names.push(name.clone());
    }
    Ok(names)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let dir = output_dir(&cli);
    let cfg = load_config(&cli);
    let config_json = match &cfg {
        Ok(c) => serde_json::to_value(c).expect("config serializes"),
        Err(_) => Value::Null,
    };
    let result = cfg.and_then(|c| commands::run(cli.command, &c));

    let (mut out, mut error) = match result {
        Ok(o) => (o, None),
        Err(e) => (Output::default(), Some(e)),
    };
    if error.is_none() {
        // The most severe deferred failure decides the status.
        error = out.failures.iter().max_by_key(|e| e.exit_code()).cloned();
    }
    let mut failures: Vec<String> = out.failures.iter().map(|e| e.to_string()).collect();
    if let Some(e) = &error {
        if !failures.contains(&e.to_string()) {
            failures.push(e.to_string());
        }
    }

    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return ExitCode::from(1);
    }
    let outputs = match write_outputs(&dir, &out) {
        Ok(n) => n,
        Err(e) => {
            failures.push(e.to_string());
            if error.is_none() {
                error = Some(e);
            }
            Vec::new()
        }
    };
    let code = error.as_ref().map_or(0, |e| e.exit_code());
    let manifest = json!({
        "tool": "fracavg",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "config": config_json,
        "config_sha256": hash(&config_json),
        "wall_time_s": start.elapsed().as_secs_f64(),
        "status": error.as_ref().map_or("ok", |e| e.status()),
        "exit_code": code,
        "failures": failures,
        "outputs": outputs,
        "summary": Value::Object(std::mem::take(&mut out.summary)),
    });
    let text = serde_json::to_string_pretty(&manifest).expect("JSON values serialize");
    if let Err(e) = write_file(&dir, "manifest.json", &text) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if let Some(e) = &error {
        eprintln!("error: {e}");
    }
    ExitCode::from(code)
}
