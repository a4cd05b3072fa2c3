use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use krylovmp_cli::commands::{self, Outcome};
use krylovmp_cli::config::{ConfigError, ExperimentConfig};

const THREADS_VAR: &str = "KRYLOVMP_THREADS";

/// Mixed-precision preconditioned CG experiments with CSV output.
#[derive(Parser)]
#[command(name = "krylovmp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one PCG solve and write its per-iteration trace.
    Run(Overrides),
    /// Run split PCG and Saad's split variant with the same formats
    /// (fmt_L = fmt_s, fmt_R = fmt_q).
    CompareSaad(Overrides),
    /// Run split PCG for every (fmt_L, fmt_R) pair and write the heatmap.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// Comma-separated format list, e.g. `fp64,fp32,fp16,bfloat16`.
        #[arg(long)]
        formats: Option<String>,
    },
}

#[derive(Args)]
struct Overrides {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    maxiter: Option<String>,
    /// none, left, right, split or saad-split.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    fmt_s: Option<String>,
    #[arg(long)]
    fmt_q: Option<String>,
    #[arg(long)]
    fmt_z: Option<String>,
}

impl Overrides {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::parse(&text)?
            }
            None => ExperimentConfig::default(),
        };
        let pairs = [
            ("output", &self.out),
            ("maxiter", &self.maxiter),
            ("scheme.mode", &self.mode),
            ("scheme.fmt_s", &self.fmt_s),
            ("scheme.fmt_q", &self.fmt_q),
            ("scheme.fmt_z", &self.fmt_z),
        ];
        for (key, v) in pairs {
            if let Some(v) = v {
                config.set(key, v)?;
            }
        }
        Ok(config)
    }
}

fn threads() -> Result<Option<usize>, ConfigError> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| ConfigError::new(THREADS_VAR, format!("expected a count, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Run(o) => commands::run(&o.load()?),
        Command::CompareSaad(o) => commands::compare_saad(&o.load()?),
        Command::Sweep { overrides, formats } => {
            let mut config = overrides.load()?;
            if let Some(f) = formats {
                config.set("sweep.formats", &f)?;
            }
            commands::sweep(&config, threads()?)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
