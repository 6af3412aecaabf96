use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use svqmc_cli::{price, verify, CliError, PriceOptions};

#[derive(Parser)]
#[command(
    name = "svqmc",
    version,
    about = "Stochastic-volatility option pricing with randomized QMC"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment configuration and write a CSV result table.
    Price {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Output file (default: the configuration's `output`, else results.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-replicate means next to the output.
        #[arg(long)]
        emit_replicates: bool,
        /// Write 0 in the wall_ms column so output is reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Check a result table against an expectation file.
    Verify {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        expect: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Price {
            config,
            seed,
            out,
            emit_replicates,
            no_timing,
        } => {
            let out = price(&PriceOptions {
                config,
                seed,
                out,
                emit_replicates,
                timing: !no_timing,
            })?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Verify { results, expect } => {
            let checks = verify(&results, &expect)?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.description);
            }
            println!("{} of {} checks passed", checks.len() - failed, checks.len());
            if failed > 0 {
                return Err(CliError::Verification(failed));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
