//! `terrace`: config-driven runner for the radial reaction-diffusion
//! laboratory.
//!
//! Exit codes: 0 success, 2 config error, 3 solver bracket or convergence
//! error, 4 runtime instability, 1 anything else.

mod commands;
mod config;
mod error;
mod experiment;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{RunOptions, OBSERVERS};
use crate::config::{Config, FAMILIES, KNOWN_KEYS};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "terrace",
    version,
    about = "Radial gradient reaction-diffusion laboratory"
)]
struct Cli {
    /// Experiment configuration (flat `key = value` text; see `terrace keys`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides `integrator.observe_every`.
    #[arg(long, global = true)]
    observe_every: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minima and derived constants of the potential, as `analysis.json`.
    Analyze,
    /// Bistable front between `front.m_minus` and `front.m_plus`, as `front.csv`.
    Front,
    /// Integrates the experiment; writes snapshots, observer CSVs and `manifest.json`.
    Run,
    /// Fits a propagating terrace to the snapshots of a finished run.
    Terrace {
        /// Manifest of the run (default `<out>/manifest.json`).
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Runs several configurations concurrently into `<out>/<config stem>`.
    Sweep {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Runs the experiment and writes the firewall, escape and invasion audits.
    Audit,
    /// Lists the configuration keys.
    Keys,
}

fn load(path: Option<&Path>) -> CliResult<Config> {
    let path = path.ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    Config::load(path)
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let opts = RunOptions {
        observe_every: cli.observe_every,
        audits: false,
    };
    let cfg = || load(cli.config.as_deref());
    match &cli.command {
        Command::Analyze => commands::analyze(&cfg()?, &cli.out).map(drop),
        Command::Front => commands::front(&cfg()?, &cli.out).map(drop),
        Command::Run => commands::run(&cfg()?, &cli.out, opts).map(drop),
        Command::Audit => commands::run(
            &cfg()?,
            &cli.out,
            RunOptions {
                audits: true,
                ..opts
            },
        )
        .map(drop),
        Command::Terrace { manifest } => {
            let path = manifest
                .clone()
                .unwrap_or_else(|| cli.out.join("manifest.json"));
            commands::terrace(&path, &cli.out.join("terrace")).map(drop)
        }
        Command::Sweep { configs } => commands::sweep(configs, &cli.out, opts),
        Command::Keys => {
            for (k, help) in KNOWN_KEYS {
                println!("{k:<26} {help}");
            }
            for f in FAMILIES {
                println!("{f:<26} open family");
            }
            for (kind, params) in OBSERVERS {
                println!("observer.{kind}: {}", params.join(", "));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
