//! `schwarz-stab`: solve, rearrange and audit planar Poisson problems.
//!
//! Exit status: 0 success, 1 a verdict failed, 2 bad configuration or
//! input, 3 an output could not be written, 4 rasterization or solver
//! failure.

mod commands;
mod config;
mod failure;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Ctx;
use config::{check_h, RunConfig};
use failure::{Failure, Outcome, EXIT_CONFIG};
use output::Targets;

#[derive(Parser)]
#[command(name = "schwarz-stab", version, about = "Rearrangement stability audits for -Δu = f on planar grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid spacing; overrides the config.
    #[arg(long)]
    h: Option<f64>,
    /// Isoperimetric constant γ_n; overrides the config.
    #[arg(long = "gamma-n")]
    gamma_n: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (0: one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solve on the grid; writes u as a grid CSV and solver diagnostics.
    Solve(Common),
    /// Full deficit report; exit 1 when a verdict fails.
    Audit(Common),
    /// The f_σ family on the unit disk.
    Counterexample {
        #[command(flatten)]
        common: Common,
        /// Bump widths, comma separated.
        #[arg(long, value_delimiter = ',')]
        sigma: Option<Vec<f64>>,
    },
    /// One audit row per point of the configured sweep grid.
    Sweep(Common),
    /// Decreasing rearrangement of the source (or solution) as a profile table.
    Rearrange {
        #[command(flatten)]
        common: Common,
        /// Rearrange the solution u instead of the source f.
        #[arg(long)]
        solution: bool,
    },
}

fn load(common: &Common) -> Outcome<(RunConfig, PathBuf)> {
    let (mut cfg, base) = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => (RunConfig::default(), PathBuf::new()),
    };
    if let Some(h) = common.h {
        check_h(h)?;
        cfg.h = Some(h);
    }
    if let Some(g) = common.gamma_n {
        cfg.constants.gamma_n = g;
    }
    cfg.validate()?;
    Ok((cfg, base))
}

fn run(cli: Cli) -> Outcome<u8> {
    let (name, common) = match &cli.command {
        Command::Solve(c) => ("solve", c),
        Command::Audit(c) => ("audit", c),
        Command::Counterexample { common, .. } => ("counterexample", common),
        Command::Sweep(c) => ("sweep", c),
        Command::Rearrange { common, .. } => ("rearrange", common),
    };
    let (cfg, base) = load(common)?;
    let targets = Targets::resolve(name, common.out.as_deref(), &cfg.outputs, &base);
    targets.check_writable()?;
    let base: &Path = &base;
    let ctx = Ctx { cfg, base, targets, workers: common.workers };
    match cli.command {
        Command::Solve(_) => commands::solve(&ctx),
        Command::Audit(_) => commands::audit_cmd(&ctx),
        Command::Counterexample { sigma, .. } => {
            if let Some(s) = &sigma {
                if s.iter().any(|x| !(x.is_finite())) {
                    return Err(Failure::new(EXIT_CONFIG, "σ values must be finite"));
                }
            }
            commands::counterexample(&ctx, sigma)
        }
        Command::Sweep(_) => commands::sweep(&ctx),
        Command::Rearrange { solution, .. } => commands::rearrange(&ctx, solution),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on malformed arguments
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
