//! Command-line front end: bound curves, parameter sweeps, MSE bounds, and
//! the acceptance report, driven by a TOML scenario config.

mod config;
mod run;

use anyhow::Result;
use clap::{Parser, Subcommand};
use config::ScenarioConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "outage-bounds",
    about = "Lower bounds on Bayesian outage error probability and MSE, \
             with estimator benchmarking",
    version
)]
struct Cli {
    /// Scenario config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path (overrides [output].path from the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Monte Carlo seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo trials override.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound and empirical-outage curves over an h grid (CSV).
    Bounds,
    /// Bounds and estimators at fixed h across a model-parameter sweep (CSV).
    Sweep,
    /// Distortion / moment / MSE bounds (CSV).
    Mse,
    /// Run the acceptance suite and write the pass/fail report.
    Accept {
        /// Offset one oracle by +0.1 to demonstrate failure reporting.
        #[arg(long)]
        perturb: bool,

        /// Restrict to specific criterion groups (1-8); repeatable.
        /// Default: all groups.
        #[arg(long)]
        group: Vec<u8>,
    },
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("--config <path> is required for this subcommand"))?;
    let mut cfg = ScenarioConfig::from_path(path)?;
    if let Some(mc) = cfg.mc.as_mut() {
        if let Some(seed) = cli.seed {
            mc.seed = seed;
        }
        if let Some(trials) = cli.trials {
            mc.trials = trials;
        }
    } else if cli.seed.is_some() || cli.trials.is_some() {
        cfg.mc = Some(config::McSection {
            trials: cli.trials.unwrap_or(100_000),
            seed: cli.seed.unwrap_or(0),
        });
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Bounds => {
            let cfg = load_config(cli)?;
            run::validate_estimators(&cfg)?;
            let csv = run::run_bounds(&cfg)?;
            let path = run::write_output(&cfg, cli.out.as_deref(), &csv)?;
            eprintln!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep => {
            let cfg = load_config(cli)?;
            let csv = run::run_sweep(&cfg)?;
            let path = run::write_output(&cfg, cli.out.as_deref(), &csv)?;
            eprintln!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Mse => {
            let cfg = load_config(cli)?;
            let csv = run::run_mse(&cfg)?;
            let path = run::write_output(&cfg, cli.out.as_deref(), &csv)?;
            eprintln!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Accept { perturb, group } => {
            let (report, ok) = run::run_accept(cli.seed, cli.trials, *perturb, group);
            match &cli.out {
                Some(path) => {
                    std::fs::write(path, &report)?;
                    eprintln!("wrote {}", path.display());
                }
                None => print!("{report}"),
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}
