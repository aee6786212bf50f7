use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod error;
mod ingest;

#[derive(Debug, Parser)]
#[command(name = "lsigma", version, about = "Distortion-weighted norms, dual norms and maximal correlation risk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a distortion spec (constant, avar:B, power:S, log, step:B1,L1;B2,L2...)
    ValidateDistortion { spec: String },
    /// ‖Y‖_{σ,p}
    Norm {
        data: PathBuf,
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value = "2")]
        vecnorm: String,
    },
    /// Dual norm of Z with its certificate
    DualNorm {
        data: PathBuf,
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value = "2")]
        vecnorm: String,
        /// Also write the dominating envelope Z′ as a data file (JSON)
        #[arg(long)]
        envelope_out: Option<PathBuf>,
    },
    /// Whether Z′ σ-dominates Z
    Dominates {
        zp: PathBuf,
        z: PathBuf,
        #[arg(long)]
        sigma: String,
    },
    /// Maximal correlation risk ρ_Z(Y) with its bounds
    Risk {
        z: PathBuf,
        y: PathBuf,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value = "2")]
        vecnorm: String,
    },
    /// Dual norm certificate, optionally cross-checked by the brute-force oracles
    Certify {
        data: PathBuf,
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value = "2")]
        vecnorm: String,
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1000)]
        restarts: usize,
        #[arg(long, env = "SIGMA_RISK_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Run a manifest of jobs in parallel
    Report {
        manifest: PathBuf,
        /// Worker threads (default: available cores)
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn print(value: &serde_json::Value) {
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = writeln!(io::stdout().lock(), "{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Report { manifest, jobs } => commands::report(manifest, *jobs),
        other => commands::run(other, Path::new("")).map(|v| (v, 0)),
    };
    match outcome {
        Ok((value, code)) => {
            print(&value);
            ExitCode::from(code)
        }
        Err(e) => {
            if let Some(payload) = e.payload() {
                print(&payload);
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
