//! `pfhaf`: determinants, permanents, pfaffians and hafnians from the
//! command line, plus seeded inequality batteries.
//!
//! Exit status: 0 when every check passed, 1 when a check failed, 2 on a
//! usage or input error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pfhaf::format::Mode;
use pfhaf::gram::Seed;

#[derive(Parser, Debug)]
#[command(
    name = "pfhaf",
    version,
    about = "Matrix functionals and inequality checks"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Scalar mode; inferred from the input file when omitted.
    #[arg(long, global = true, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    #[arg(long, global = true, default_value_t = Seed::default().0)]
    pub seed: u64,
    /// Number of random instances.
    #[arg(long, global = true, default_value_t = 100)]
    pub count: u64,
    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub samples: u64,
    /// Dimension cap for the per/haf/pf kernels.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// Write line-delimited JSON records here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate det, per, pf or haf on a matrix file.
    Compute(commands::ComputeArgs),
    /// Coefficients of a block λ-polynomial.
    Coeffs(commands::CoeffsArgs),
    /// Run an inequality battery, or check one given instance.
    Verify(commands::VerifyArgs),
    /// Exact Gaussian moment against a Monte Carlo estimate.
    Wick(commands::WickArgs),
    /// Scan the moment conjecture over (n, p).
    Conjecture(commands::ConjectureArgs),
    /// Products of linear functionals on the sphere.
    Polar {
        #[command(subcommand)]
        command: commands::PolarCommand,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: pfhaf::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match cli.command {
        Command::Compute(a) => commands::compute(g, &a),
        Command::Coeffs(a) => commands::coeffs(g, &a),
        Command::Verify(a) => commands::verify(g, &a),
        Command::Wick(a) => commands::wick(g, &a),
        Command::Conjecture(a) => commands::conjecture(g, &a),
        Command::Polar { command } => commands::polar(g, &command),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
