mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::load;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "brittle-limit", version, about = "Effective densities, laminates and damage sweeps for brittle energies")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run description.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "BRITTLE_LIMIT_JOBS")]
    jobs: Option<usize>,

    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Pointwise densities: f, g_eps, W_eps, G, h, support of K, W_bar.
    Density,
    /// SQW_eps against W_bar over a list of eps.
    Converge,
    /// Exact energies of the laminate constructions.
    Laminate,
    /// Alternating-minimization sweeps on a grid.
    Solve,
    /// Oracle suite; the exit code names the first failing oracle.
    Verify,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = cli.config.as_deref().ok_or_else(|| CliError::Schema("--config is required".into()))?;
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Output(format!("thread pool: {e}")))?;
    }
    let out: &Path = &cli.out;
    std::fs::create_dir_all(out)?;
    match cli.command {
        Command::Density => commands::density(&load(config)?, out),
        Command::Converge => commands::converge(&load(config)?, out),
        Command::Laminate => commands::laminate(&load(config)?, out),
        Command::Solve => commands::solve(&load(config)?, cli.seed, out),
        Command::Verify => commands::verify(&load(config)?, cli.seed, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("brittle-limit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
