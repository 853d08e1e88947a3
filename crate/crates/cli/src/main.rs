use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use serde_json::json;

mod config;
mod experiments;
mod output;

use config::{ConfigError, ExperimentConfig};
use output::{sha256_hex, Output};

const DEFAULT_OUT: &str = "hawkes-out";

#[derive(Parser)]
#[command(name = "hawkes", version, about = "Simulate and validate nonlinear Hawkes processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory (overrides HAWKES_OUT and the config).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        replicas: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the acceptance checks.
    Validate {
        /// Smaller samples, same thresholds.
        #[arg(long)]
        quick: bool,
        /// Also write report.json and manifest.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_dir(flag: Option<PathBuf>, cfg: Option<&PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("HAWKES_OUT").map(PathBuf::from))
        .or_else(|| cfg.cloned())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn model_hash(cfg: &ExperimentConfig) -> Result<String> {
    Ok(sha256_hex(serde_json::to_string(&cfg.model)?.as_bytes()))
}

fn run(config: PathBuf, out: Option<PathBuf>, replicas: Option<usize>, seed: Option<u64>) -> Result<ExitCode> {
    let mut cfg = config::load(&config)?;
    if let Some(r) = replicas {
        if r == 0 {
            return Err(ConfigError("--replicas must be >= 1".into()).into());
        }
        cfg.replicas = r;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = out_dir(out, cfg.output_dir.as_ref());
    cfg.output_dir = None;
    let hash = model_hash(&cfg)?;
    let mut writer = Output::create(&dir, &hash, cfg.seed)?;
    let ran = experiments::run(&cfg, &mut writer)?;
    let manifest = writer.finish(json!({
        "tool": "hawkes",
        "version": env!("CARGO_PKG_VERSION"),
        "model_hash": hash,
        "config": cfg,
    }))?;
    eprintln!("wrote {}", manifest.display());
    Ok(if ran.validation_failed {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn validate(quick: bool, out: Option<PathBuf>) -> Result<ExitCode> {
    let failed = match out {
        Some(dir) => {
            let mut writer = Output::create(&dir, "none", 0)?;
            let failed = experiments::validate(quick, &mut writer)?;
            writer.finish(json!({ "tool": "hawkes", "version": env!("CARGO_PKG_VERSION"), "quick": quick }))?;
            failed
        }
        None => {
            let tmp = std::env::temp_dir().join(format!("hawkes-validate-{}", std::process::id()));
            let mut writer = Output::create(&tmp, "none", 0)?;
            let failed = experiments::validate(quick, &mut writer)?;
            let _ = std::fs::remove_dir_all(&tmp);
            failed
        }
    };
    Ok(if failed { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            replicas,
            seed,
        } => run(config, out, replicas, seed),
        Command::Validate { quick, out } => validate(quick, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            if let Some(c) = e.downcast_ref::<ConfigError>() {
                eprintln!("config error: {c}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}
