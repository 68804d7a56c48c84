//! `dtc`: spectra, dynamics, trajectories, dark states and symmetry checks for
//! dissipative Hubbard chains, driven by a JSON run configuration.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "dtc", version = output::VERSION, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Liouvillian spectrum, mode classes, gap and commensurability (L <= 3).
    Spectrum(RunArgs),
    /// Master-equation evolution of a random state with spin/echo probes and DFTs (L <= 4).
    Evolve(RunArgs),
    /// Quantum-jump trajectories and their ensemble average (L <= 4).
    Trajectories(RunArgs),
    /// Dark states of the scenario (L <= 4).
    Darkstates(RunArgs),
    /// Certificate for S+ as a strong dynamical symmetry.
    Symmetry(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the disorder, initial-state and trajectory seeds.
    #[arg(long)]
    seed_override: Option<u64>,
    /// Suppress progress messages on stderr.
    #[arg(long)]
    quiet: bool,
}

type Handler = fn(&Context) -> Result<output::Output, CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (args, cmd): (&RunArgs, Handler) = match &cli.command {
        Command::Spectrum(a) => (a, commands::spectrum_cmd),
        Command::Evolve(a) => (a, commands::evolve_cmd),
        Command::Trajectories(a) => (a, commands::trajectories_cmd),
        Command::Darkstates(a) => (a, commands::darkstates_cmd),
        Command::Symmetry(a) => (a, commands::symmetry_cmd),
    };
    let mut config = RunConfig::load(&args.config)?.with_seed_override(args.seed_override);
    if let Some(dir) = &args.out {
        config.output_dir = dir.clone();
    }
    let ctx = Context {
        config: config.resolve()?,
        quiet: args.quiet,
    };
    let out = cmd(&ctx)?;
    if !ctx.quiet {
        for p in out.written() {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
