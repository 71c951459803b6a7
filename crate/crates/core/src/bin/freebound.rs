use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use freebound::config::{parse_config, Mode};
use freebound::pipeline::{apply_overrides, classify, run_pipeline, write_failure_summary};

/// Free-boundary solver driven by a TOML configuration.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and write densities, boundaries, solution, front and residuals.
    Solve(RunArgs),
    /// Write the constants ledger and certified horizon only.
    Constants(RunArgs),
    /// Check the problem data and stop.
    Validate(RunArgs),
    /// Solve, then cross-check against the finite-difference oracle.
    Compare(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Output directory, overriding the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Segment horizon, overriding the configuration.
    #[arg(long)]
    sigma: Option<f64>,
    /// Time steps per segment, overriding the configuration.
    #[arg(long)]
    grid: Option<usize>,
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("FBP_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().with_context(|| format!("FBP_THREADS must be a positive integer, got {v:?}"))?;
    anyhow::ensure!(n > 0, "FBP_THREADS must be a positive integer, got 0");
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the worker pool")?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    init_threads()?;
    let (mode, args) = match cli.command {
        Command::Solve(a) => (None, a),
        Command::Constants(a) => (Some(Mode::Constants), a),
        Command::Validate(a) => (Some(Mode::Validate), a),
        Command::Compare(a) => (Some(Mode::SolveOracle), a),
    };
    let mut cfg = match parse_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            if let Some(out) = &args.out {
                let path = write_failure_summary(out, mode.unwrap_or(Mode::Solve), &e).context("writing the failure summary")?;
                println!("{}", path.display());
            }
            return Ok(classify(&e).exit_code());
        }
    };
    // `solve` keeps an oracle comparison requested by the file.
    let mode = mode.unwrap_or(if cfg.mode == Mode::SolveOracle { Mode::SolveOracle } else { Mode::Solve });
    if let Err(e) = apply_overrides(&mut cfg, mode, args.out.as_deref(), args.sigma, args.grid) {
        eprintln!("error: {e}");
        let path = write_failure_summary(&cfg.out, mode, &e).context("writing the failure summary")?;
        println!("{}", path.display());
        return Ok(classify(&e).exit_code());
    }
    let report = run_pipeline(&cfg).with_context(|| format!("writing artifacts to {}", cfg.out.display()))?;
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    for a in &report.artifacts {
        println!("{}", a.display());
    }
    Ok(report.status.exit_code())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
