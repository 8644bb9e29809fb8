//! `cascade` — experiment runner for the shear-cascade transport library.
//!
//! Every subcommand runs one experiment, writes `report.json` and
//! `data.csv` under `OUT/<experiment>/`, prints a one-line verdict,
//! and exits nonzero if any check failed.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use cascade_cli::config::{parse_ladder, RunConfig};
use cascade_cli::experiments;
use cascade_cli::report::ExperimentReport;

#[derive(Parser)]
#[command(
    name = "cascade",
    version,
    about = "Numerical experiments on an exactly solvable mixing cascade",
    long_about = "Runs advection-diffusion and tracer experiments for the \
                  alternating-shear cascade on the [0, sqrt(2)] x [0, 1] torus, \
                  writing machine-readable reports."
)]
struct Cli {
    /// Cascade scaling exponent in (0, 1).
    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Grid exponent q (2^q x 2^q cells).
    #[arg(long, global = true)]
    grid_exp: Option<u32>,

    /// Baseline shear stages per mixing window.
    #[arg(long, global = true)]
    depth: Option<u32>,

    /// Deepest retained window index.
    #[arg(long, global = true)]
    jmax: Option<u32>,

    /// Diffusivity ladder as log2 exponents lo:hi:step, e.g. -10:-18:-1.
    #[arg(long, global = true, value_name = "LO:HI:STEP", allow_hyphen_values = true)]
    kappa_ladder: Option<String>,

    /// Seed for all pseudo-random draws.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory root.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Also write PGM frames of the evolving field where supported.
    #[arg(long, global = true)]
    snapshots: bool,

    /// Config file with `key = value` lines (overridden by flags).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Terminal norms along the diffusivity ladder (anomalous dissipation).
    Dissipation,
    /// Per-period decay rates of the bare mixer (enhanced dissipation).
    Enhancement,
    /// Single-cloud spreading: diffusive then superdiffusive regimes.
    Richardson,
    /// Two-point dispersion envelope and memory loss.
    Pairs,
    /// Strong convergence to the zero-diffusivity limit.
    Converge,
    /// Uniform fractional regularity and first-order blow-up.
    Regularity,
    /// Supercritical norm growth at a fixed probe time.
    Intermittency,
    /// Energy staircase of the limit evolution.
    EnergyJumps,
    /// Gradient growth of the bare mixer against remaining time.
    BaseflowNorms,
    /// Fast internal consistency checks.
    Selftest,
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    if let Some(v) = cli.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = cli.grid_exp {
        cfg.grid_exp = v;
    }
    if let Some(v) = cli.depth {
        cfg.depth = v;
    }
    if let Some(v) = cli.jmax {
        cfg.jmax = v;
    }
    if let Some(text) = &cli.kappa_ladder {
        cfg.kappa_ladder = parse_ladder(text)?;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(dir) = &cli.out {
        cfg.out = dir.clone();
    }
    if cli.snapshots {
        cfg.snapshots = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<ExperimentReport> {
    Ok(match cli.command {
        Command::Dissipation => experiments::dissipation::run(cfg)?,
        Command::Enhancement => experiments::enhancement::run(cfg)?,
        Command::Richardson => experiments::richardson::run(cfg)?,
        Command::Pairs => experiments::pairs::run(cfg)?,
        Command::Converge => experiments::converge::run(cfg)?,
        Command::Regularity => experiments::regularity::run(cfg)?,
        Command::Intermittency => experiments::intermittency::run(cfg)?,
        Command::EnergyJumps => experiments::energy_jumps::run(cfg)?,
        Command::BaseflowNorms => experiments::baseflow::run(cfg)?,
        Command::Selftest => experiments::selftest::run(cfg)?,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(&cli, &cfg) {
        Ok(report) => {
            let dir = cfg.out.join(report.name());
            if let Err(e) = report.write(&dir) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            for check in report.checks() {
                let mark = if check.passed { "ok" } else { "FAILED" };
                println!("  [{mark}] {} ({})", check.name, check.observed);
            }
            println!("{}", report.summary_line());
            println!("wrote {}", dir.display());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
