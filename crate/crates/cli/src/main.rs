use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use inlslab::campaign::{property_campaign, CampaignKind};
use inlslab::sweep::{default_workers, sweep, Axes};
use inlslab::{analyze, exit_code, ground_state, io, load_config, run_experiment};

#[derive(Parser)]
#[command(name = "inlslab", version, about = "Radial INLS experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one initial datum and write series, snapshots and summary.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sharp Gagliardo-Nirenberg constant and its minimizer.
    GroundState {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Blow-up analysis of a finished run directory.
    Analyze {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plots: bool,
    },
    /// Cartesian product of runs over dotted config paths.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// JSON file mapping dotted config paths to value lists.
        #[arg(long)]
        axes: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Inequality checks over the random profile family.
    Campaign {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        kind: CampaignKind,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Evolve { config, out } => {
            let cfg = load_config(&config)?;
            let o = run_experiment(&cfg, &out)?;
            eprintln!("{} at t = {} after {} steps", o.summary.stop_reason, o.summary.t_stop, o.summary.steps);
            Ok(exit_code(o.result.stop_reason))
        }
        Command::GroundState { config, out } => {
            let cfg = load_config(&config)?;
            let (gs, converged) = ground_state::run_ground_state(&cfg, &out)?;
            eprintln!("C_GN = {} (J = {}, residual {:.3e})", gs.gn_constant, gs.weinstein, gs.residual);
            Ok(if converged { 0 } else { 1 })
        }
        Command::Analyze { run, out, plots } => {
            let (r, written) = analyze::analyze_run(&run, &out, plots)?;
            eprintln!("T* = {} +- {}", r.t_star.t_star, r.t_star.uncertainty);
            for w in written {
                eprintln!("wrote {}", w.display());
            }
            Ok(0)
        }
        Command::Sweep { config, axes, out, workers } => {
            let template: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&config)?)
                .with_context(|| format!("parsing {}", config.display()))?;
            let axes: Axes = serde_json::from_str(&std::fs::read_to_string(&axes)?)
                .with_context(|| format!("parsing {}", axes.display()))?;
            let rows = sweep(&template, &axes, &out, workers.unwrap_or_else(default_workers))?;
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            eprintln!("{} cells, {failed} failed", rows.len());
            Ok(0)
        }
        Command::Campaign { config, kind, count, seed, out } => {
            let cfg = load_config(&config)?;
            let report = property_campaign(kind, &cfg, count, seed.unwrap_or(cfg.seed))?;
            io::write_json(&out, &report)?;
            eprintln!("{}", serde_json::to_string(&report.summary)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
