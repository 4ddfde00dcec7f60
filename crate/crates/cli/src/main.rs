use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fedcheck_cli::{cmd_bench, cmd_run, cmd_sweep};

#[derive(Parser)]
#[command(name = "fedcheck", version, about = "Federated learning experiments with a secure cross-client check")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Override the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also dump per-round score matrices (run only).
    #[arg(long, global = true)]
    debug_scores: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write metrics.csv.
    Run { config: PathBuf },
    /// Run the [sweep] grid and write sweep.csv.
    Sweep { config: PathBuf },
    /// Run an SLVR experiment and write its communication ledger.
    Bench { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => cmd_run(config, &cli.out, cli.seed, cli.debug_scores),
        Command::Sweep { config } => cmd_sweep(config, &cli.out, cli.seed),
        Command::Bench { config } => cmd_bench(config, &cli.out, cli.seed),
    };
    match result {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
