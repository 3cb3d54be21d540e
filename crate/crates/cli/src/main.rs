//! Command-line front end: demos, invariant suites, and the end-to-end
//! pipeline, with JSON + CSV reports side by side.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "smoothext",
    about = "Diffeomorphic extraction and critical-point-free smooth approximation, at desk scale"
)]
struct Cli {
    /// Truncation dimension D.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Random seed; identical config and seed give byte-identical reports.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Corpus size for sampled checks.
    #[arg(long, global = true)]
    corpus: Option<usize>,
    /// Base of the accuracy budget eps(x) = eps_base (1 + |x|).
    #[arg(long, global = true)]
    eps_base: Option<f64>,
    /// Output directory for reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fixed-point residual tolerance.
    #[arg(long, global = true)]
    tol_fp: Option<f64>,
    /// Surjectivity threshold on the smallest singular value.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Flat key = value config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Delete the fiber origin and emit the displacement trajectory.
    ExtractPoint,
    /// Extract a sampled graph piece and record per-sample diagnostics.
    ExtractGraph,
    /// Build the flattening pair and emit the clause check table.
    Flatten,
    /// Run the full approximation pipeline on the absolute-value demo map.
    Approximate,
    /// Run every module's property suite.
    Invariants,
    /// Show the obstruction to injective-derivative approximation.
    NegativeDemo,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = Overrides {
        dim: cli.dim,
        seed: cli.seed,
        corpus: cli.corpus,
        eps_base: cli.eps_base,
        out: cli.out,
        tol_fp: cli.tol_fp,
        tol_rank: cli.tol_rank,
    };
    let mut cfg = match RunConfig::load(cli.config.as_deref(), &flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    // The obstruction demo needs a deep reserved block for its long cover.
    if matches!(cli.command, Command::NegativeDemo) && cli.dim.is_none() {
        cfg.dim = 2048;
    }
    if let Err(e) = std::fs::create_dir_all(&cfg.out) {
        eprintln!("cannot create output directory: {e}");
        return ExitCode::from(2);
    }

    let (name, outcome) = match cli.command {
        Command::ExtractPoint => ("extract-point", commands::extract_point(&cfg)),
        Command::ExtractGraph => ("extract-graph", commands::extract_graph(&cfg)),
        Command::Flatten => ("flatten", commands::flatten(&cfg)),
        Command::Approximate => ("approximate", commands::approximate(&cfg)),
        Command::Invariants => ("invariants", commands::invariants(&cfg)),
        Command::NegativeDemo => ("negative-demo", commands::negative_demo(&cfg)),
    };

    match outcome {
        Ok(true) => {
            println!("{name}: all certificates passed (reports in {})", cfg.out.display());
            ExitCode::SUCCESS
        }
        Ok(false) => {
            eprintln!("{name}: certificate failure (see {})", cfg.out.display());
            commands::write_failure(&cfg.out, name, "see-report", "a certificate failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("{name}: {e}");
            commands::write_failure(&cfg.out, name, e.anchor(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}
