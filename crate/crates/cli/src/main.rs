//! Batch experiment runner for the Bergman/Fock operator toolkit.
//!
//! Usage: `bergfock <subcommand> --config <path> [--out <dir>] [--threads <k>]`
//!
//! Subcommands: kernel-identities, rudin-forelli, toeplitz, berezin-map,
//! localize, covering, compactness, spectrum. Exit codes: 0 success,
//! 2 validation error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::Parser;

use bergfock::config::ExperimentConfig;
use bergfock::runner::{run, Subcommand};
use bergfock::Error;

#[derive(Parser)]
#[command(
    name = "bergfock",
    about = "Toeplitz operators, Berezin transforms and compactness diagnostics \
             on Bergman and Bargmann-Fock spaces",
    version
)]
struct Cli {
    /// kernel-identities | rudin-forelli | toeplitz | berezin-map |
    /// localize | covering | compactness | spectrum
    subcommand: String,

    /// Path to the experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,

    /// Output directory for artifacts (defaults to the current directory).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Parallelism degree; results are independent of it.
    #[arg(long)]
    threads: Option<usize>,
}

fn error_kind(e: &Error) -> (&'static str, u8) {
    match e {
        Error::Domain(_)
        | Error::InvalidParameter(_)
        | Error::Mismatch(_)
        | Error::SupBound { .. }
        | Error::Unsupported(_)
        | Error::Io(_)
        | Error::Serde(_) => ("validation", 2),
        Error::Numerical(_) => ("numerical", 3),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let result = (|| -> Result<(), Error> {
        let sub = Subcommand::from_str(&cli.subcommand)?;
        let text = std::fs::read_to_string(&cli.config)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        let out = cli.out.unwrap_or_else(|| PathBuf::from("."));
        run(sub, &cfg, &out)
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, code) = error_kind(&e);
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.to_string(), "kind": kind })
            );
            ExitCode::from(code)
        }
    }
}
