//! Command-line front end.  Every subcommand reads one TOML scenario file,
//! writes its artifacts under an output directory, and exits 0 on success,
//! 1 on rejected input, 2 on a numerical failure.

pub mod commands;
pub mod config;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use commands::{Ctx, Provenance};

#[derive(Parser)]
#[command(
    name = "becback",
    version,
    about = "Measurement backaction of dispersive condensate imaging"
)]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides [output].directory in the scenario.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for every stochastic step (sampling points, photon counts).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for parameter sweeps; default lets the pool decide.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dephasing and depletion rates with cross-checked routes.
    Rates,
    /// Signal, noise, and survival budget per atom number.
    Estimate,
    /// Number-state master-equation evolution.
    Evolve,
    /// Phase map and dark-ground / phase-contrast images.
    Image,
    /// Numerical self-checks (kernel identities, route agreement).
    Check,
}

/// Entry point for the binary; returns the process exit code.
pub fn run() -> u8 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let config_path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config PATH is required".into()))?;
    let text = std::fs::read_to_string(config_path)?;
    let parsed = config::parse(&text)?;

    let out_dir = cli
        .out
        .clone()
        .or_else(|| parsed.output.as_ref().map(|o| o.directory.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir)?;

    let config_dir = config_path.parent().unwrap_or_else(|| Path::new("."));
    let scenario = parsed.validate(config_dir)?;

    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let config_sha256 = format!(
        "sha256:{}",
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>()
    );

    let ctx = Ctx {
        out_dir,
        seed: cli.seed,
        provenance: Provenance {
            tool: "becback",
            version: env!("CARGO_PKG_VERSION"),
            schema_version: config::SCHEMA_VERSION,
            config_sha256,
            seed: cli.seed,
        },
    };

    let body = || -> Result<()> {
        match cli.command {
            Command::Rates => commands::cmd_rates(&scenario, &ctx),
            Command::Estimate => commands::cmd_estimate(&scenario, &ctx),
            Command::Evolve => commands::cmd_evolve(&scenario, &ctx),
            Command::Image => commands::cmd_image(&scenario, &ctx),
            Command::Check => {
                if commands::cmd_check(&scenario, &ctx)? {
                    Ok(())
                } else {
                    Err(Error::InternalConsistency(
                        "one or more self-checks failed; see check_report.json".into(),
                    ))
                }
            }
        }
    };

    match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            pool.install(body)
        }
        None => body(),
    }
}
