//! `duowalk`: runs two-boson quantum walk scenarios from a TOML config and
//! writes plot-ready CSV or JSON.
//!
//! Exit status: 0 success, 1 i/o failure, 2 config error, 3 unphysical
//! state, 4 numerical-margin error or failed verification.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use duowalk_core::Exec;

use crate::run::{RunError, RunOptions};

#[derive(Debug, Parser)]
#[command(name = "duowalk", version, about = "Two-boson continuous-time quantum walks with mixed initial states")]
struct Cli {
    /// Run configuration (TOML).
    config: PathBuf,

    /// Also compare the fast correlation path against the brute-force
    /// Fock-space oracle and record the result in the metadata.
    #[arg(long)]
    verify: bool,

    /// Run every loop on the calling thread.
    #[arg(long)]
    sequential: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("duowalk: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| RunError::Config(format!("{}: {e}", cli.config.display())))?;
    let base = cli
        .config
        .parent()
        .map(PathBuf::from)
        .unwrap_or_default();
    let cfg = config::parse_config(&text, &base).map_err(|e| RunError::Config(e.0))?;
    let opts = RunOptions {
        exec: if cli.sequential { Exec::Sequential } else { Exec::Parallel },
        verify: cli.verify,
    };
    let summary = run::run(&cfg, &text, opts)?;
    if let Some(r) = &summary.verification {
        println!(
            "verify: L={} samples={} seed={} max deviation {:e}",
            r.num_sites, r.samples, r.seed, r.max_deviation
        );
    }
    for f in &summary.files {
        println!("{}", f.display());
    }
    Ok(())
}
