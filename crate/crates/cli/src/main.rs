//! `matsl` — spectra and characteristic-function data for the vector
//! Sturm–Liouville problem with Neumann ends, an interior value/derivative
//! jump at π/2, and a piecewise-constant weight.
//!
//! Problem definitions are JSON files (see `configs/` for samples); every
//! output file embeds the fully resolved run configuration so artifacts are
//! self-describing and re-runs are byte-identical.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use commands::CliError;

#[derive(Parser)]
#[command(
    name = "matsl",
    version,
    about = "Spectra and characteristic-function data for an impulsive vector Sturm-Liouville problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute eigenvalues by shooting and by the finite-difference oracle;
    /// write both spectra and their per-index differences.
    Spectrum(SpectrumArgs),
    /// Sample the characteristic function ω(s²) on a uniform s-grid.
    Charfn(CharfnArgs),
    /// Compare the spectrum against the zero potential and run the trace,
    /// asymptotic-ratio, and truncated-product diagnostics.
    Verify(VerifyArgs),
    /// Cross-check every shooting eigenvalue against the finite-difference
    /// error band; nonzero exit when any index disagrees.
    OracleCompare(OracleCompareArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Problem definition: JSON with fields N, alpha, a, potential.
    #[arg(long)]
    problem: PathBuf,
    /// Directory for the output files (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for λ-grid maps and bracket refinement
    /// (default: hardware parallelism).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Eigenvalues to compute, counted with multiplicity.
    #[arg(long, default_value_t = 12)]
    count: usize,
    /// Finite-difference subintervals per half (the oracle also solves the
    /// 2× refinement for its error band).
    #[arg(long, default_value_t = 512)]
    mesh: usize,
}

#[derive(Args)]
struct CharfnArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Upper end of the sample grid in s = √λ.
    #[arg(long, default_value_t = 30.0)]
    s_max: f64,
    /// Grid step in s; samples sit at s = k·step for k ≥ 1.
    #[arg(long, default_value_t = 0.1)]
    s_step: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Eigenvalues (with multiplicity) entering the spectral comparison.
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Comma-separated κ values for the imaginary-axis ratio check; the
    /// first also normalizes the truncated-product reconstruction.
    #[arg(long, value_delimiter = ',', default_values_t = vec![30.0, 60.0])]
    kappa: Vec<f64>,
    /// Consistency threshold for spectral distances and traces.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct OracleCompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Eigenvalues to compare, counted with multiplicity.
    #[arg(long, default_value_t = 12)]
    count: usize,
    /// Finite-difference subintervals per half.
    #[arg(long, default_value_t = 512)]
    mesh: usize,
    /// Agreement floor: indices must match within max(tol, error band).
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Spectrum(a) => &a.common,
        Command::Charfn(a) => &a.common,
        Command::Verify(a) => &a.common,
        Command::OracleCompare(a) => &a.common,
    };
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(CliError::Config("invalid `threads`: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("invalid `threads`: {e}")))?;
    }
    match cli.command {
        Command::Spectrum(args) => commands::cmd_spectrum(&args),
        Command::Charfn(args) => commands::cmd_charfn(&args),
        Command::Verify(args) => commands::cmd_verify(&args),
        Command::OracleCompare(args) => commands::cmd_oracle_compare(&args),
    }
}
