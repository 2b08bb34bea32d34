use std::process::ExitCode;

use clap::Parser;
use cos2phi_cli::args::{Cli, Resolved};
use cos2phi_cli::{run, UsageError, EXIT_DEGENERATE, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.command.resolve() {
        Ok(Resolved::Run(cfg)) => cfg,
        Ok(Resolved::Print(cfg)) => {
            println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            if !outcome.complete {
                eprintln!("sweep stopped early; rerun with the same checkpoint directory to resume");
            }
            if outcome.degenerate > 0 && !cfg.allow_degenerate {
                eprintln!(
                    "error: {} degenerate point(s) flagged (f01 below the resolution floor); pass --allow-degenerate to accept",
                    outcome.degenerate
                );
                return ExitCode::from(EXIT_DEGENERATE as u8);
            }
            ExitCode::SUCCESS
        }
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
