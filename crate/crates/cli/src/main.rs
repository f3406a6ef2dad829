//! `qkdv solve|verify|chain --config <path> [--out <dir>] [--seed <u64>]`

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Failure, EXIT_INVALID};
use config::RunConfig;

type Handler = fn(&RunConfig, &Path) -> Result<(), Failure>;

#[derive(Parser)]
#[command(name = "qkdv", version, about = "Quasi-periodic KdV solver and verification runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once; write trajectory, sampled CSV and report.
    Solve(RunArgs),
    /// Run the verification suite named in the config.
    Verify(RunArgs),
    /// Solve, restart from the end state, repeat.
    Chain(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn init_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("QKDV_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Failure::new(EXIT_INVALID, format!("[cli] QKDV_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::new(EXIT_INVALID, format!("[cli] thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    let (args, cmd): (&RunArgs, Handler) = match &cli.command {
        Command::Solve(a) => (a, commands::cmd_solve),
        Command::Verify(a) => (a, commands::cmd_verify),
        Command::Chain(a) => (a, commands::cmd_chain),
    };
    let mut cfg = RunConfig::load(&args.config).map_err(|m| Failure::new(EXIT_INVALID, m))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    cmd(&cfg, &out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qkdv: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
