//! `certify`: run one bosonic-certification experiment from a JSON config.
//!
//! Exit codes: 0 completed (any verdict), 1 internal failure, 2 validation
//! error, 3 resource or truncation guard tripped. Errors go to stderr as JSON.

mod config;
mod error;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde::Serialize;

use config::ExperimentConfig;
use error::CliError;

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "BOSONIC_THREADS";

#[derive(Parser, Debug)]
#[command(name = "certify", version, about = "Witness-based certification of simulated bosonic states")]
struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Proceed when a state leaks weight above the cutoff.
    #[arg(long)]
    override_truncation_guard: bool,
}

/// Run facts kept out of the reports so those stay byte-identical.
#[derive(Serialize)]
struct Metadata {
    version: &'static str,
    config: String,
    task: config::Task,
    seed: u64,
    threads: usize,
    started_unix: u64,
    elapsed_seconds: f64,
    artifacts: Vec<String>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::field(THREADS_ENV, format!("`{v}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn run(args: &Args) -> Result<(), CliError> {
    configure_threads()?;
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::field("config", format!("cannot read {}: {e}", args.config.display())))?;
    let config = ExperimentConfig::parse(&text)?;
    config.validate()?;
    std::fs::create_dir_all(&args.out)?;
    let mut guard = config.certify.guard;
    guard.allow_override |= args.override_truncation_guard;
    let seed = args.seed.unwrap_or(config.seed);
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let ctx = tasks::Context {
        config: &config,
        out: &args.out,
        seed,
        guard,
    };
    let artifacts = tasks::run(&ctx)?;
    let meta = Metadata {
        version: env!("CARGO_PKG_VERSION"),
        config: args.config.display().to_string(),
        task: config.task,
        seed,
        threads: rayon::current_num_threads(),
        started_unix: started,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
        artifacts: artifacts.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = args.out.join(&config.outputs.metadata);
    std::fs::write(path, serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
