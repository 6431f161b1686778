use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mincomm_cli::{cmd_run_file, cmd_table, cmd_verify, cmd_worstcase, TableOptions};

/// Self-triggered consensus simulator.
#[derive(Parser)]
#[command(name = "mincomm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a config file.
    Run { config: PathBuf },
    /// Reproduce the reference table (gamma = 1, 5, 10 on the six-agent graph).
    Table {
        #[arg(long, default_value_t = 0.6, hide = true)]
        alpha: f64,
    },
    /// Check the consensus bound and invariants on random instances.
    Verify {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 10)]
        max_n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Build and check the hub-plus-clique slow-convergence instance.
    Worstcase {
        #[arg(long)]
        epsilon: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    let code = match cli.command {
        Command::Run { config } => cmd_run_file(&config, &mut out, &mut err),
        Command::Table { alpha } => cmd_table(TableOptions { alpha }, &mut out, &mut err),
        Command::Verify { count, max_n, seed } => {
            cmd_verify(count, max_n, seed, &mut out, &mut err)
        }
        Command::Worstcase { epsilon } => cmd_worstcase(epsilon, &mut out, &mut err),
    };
    ExitCode::from(code as u8)
}
