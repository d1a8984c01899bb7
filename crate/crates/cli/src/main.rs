//! `raydamp <command> --config <path> [--out <dir>]`

mod commands;
mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::RunConfig;
use output::OutDir;

#[derive(Parser)]
#[command(name = "raydamp", version, about = "Linear inviscid damping experiments for symmetric channel flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (JSON, or TOML with a .toml extension).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Oracle evolution, norm series, snapshots and a representation check.
    Simulate(Common),
    /// Spectral tables, embedding scan and oracle eigenvalues.
    Spectral(Common),
    /// Kernel tables and their norms.
    Kernels(Common),
    /// Vorticity at the stationary streamline and at the probe height.
    Depletion(Common),
    /// Passive-transport baseline.
    Transport(Common),
    /// Invariant suite; exits nonzero on any failure.
    Verify(Common),
    /// Decay-fit summary across prior runs in the output directory.
    Report(Common),
}

fn out_dir(common: &Common, cfg: Option<&RunConfig>) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output.clone()))
        .unwrap_or_else(|| PathBuf::from("raydamp_out"))
}

fn load(common: &Common) -> Result<RunConfig> {
    let path = common.config.as_ref().context("--config <path> is required")?;
    RunConfig::load(path)
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("RAYDAMP_THREADS") {
        let n: usize = v.parse().with_context(|| format!("RAYDAMP_THREADS = {v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    if let Command::Report(common) = &cli.command {
        let cfg = match &common.config {
            Some(_) => Some(load(common)?),
            None => None,
        };
        let dir = out_dir(common, cfg.as_ref());
        commands::report(&dir, &OutDir::create(&dir)?)?;
        return Ok(true);
    }
    let common = match &cli.command {
        Command::Simulate(c)
        | Command::Spectral(c)
        | Command::Kernels(c)
        | Command::Depletion(c)
        | Command::Transport(c)
        | Command::Verify(c)
        | Command::Report(c) => c,
    };
    let cfg = load(common)?;
    let out = OutDir::create(&out_dir(common, Some(&cfg)))?;
    match &cli.command {
        Command::Simulate(_) => commands::simulate(&cfg, &out)?,
        Command::Spectral(_) => commands::spectral(&cfg, &out)?,
        Command::Kernels(_) => commands::kernels(&cfg, &out)?,
        Command::Depletion(_) => commands::depletion(&cfg, &out)?,
        Command::Transport(_) => commands::transport(&cfg, &out)?,
        Command::Verify(_) => return verify::verify(&cfg, &out),
        Command::Report(_) => unreachable!(),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verify: one or more invariants failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
