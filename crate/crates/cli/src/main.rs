use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cohwork::Budget;
use cohwork_cli::{run, Command, Format, JobConfig};

#[derive(Parser)]
#[command(name = "cohwork", version, about = "Batch runner for coherent theories, translations and their categories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Prover budget as R,W,D (rounds, witnesses, splits) or a single N.
    #[arg(long, global = true, default_value = "10,4,4")]
    budget: Budget,
    /// Enumeration depth for slices, searches and classifications.
    #[arg(long, global = true, default_value_t = 2)]
    depth: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized spot checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.depth == 0 {
        eprintln!("error: depth must be positive");
        return ExitCode::from(3);
    }
    let job = JobConfig {
        command: cli.command,
        budget: cli.budget,
        depth: cli.depth,
        format: cli.format,
        seed: cli.seed,
    };
    let outcome = run(&job);
    if outcome.report.is_none() {
        eprint!("{}", outcome.output);
    } else if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, &outcome.output) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(3);
        }
    } else {
        print!("{}", outcome.output);
    }
    ExitCode::from(outcome.code as u8)
}
