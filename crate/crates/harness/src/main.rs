use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use farrow_sync_harness::{run, ExperimentConfig, ExperimentKind, HarnessError};

#[derive(Parser)]
#[command(name = "farrow-sync", version, about = "Farrow-based SFO/STO estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML experiment file.
    #[arg(short, long)]
    config: PathBuf,
    /// Use the full trial counts.
    #[arg(long)]
    full: bool,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(short, long, default_value = "results")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Design a coefficient bank and report its error.
    Design(Common),
    /// Measure the error of a bank.
    Measure(Common),
    /// Run the experiment named in the config.
    Run(Common),
    /// Delta/epsilon grid sweep.
    Grid(Common),
    /// Sweep over banks of decreasing approximation error.
    ApproxSweep(Common),
    /// Sweep over the window length.
    NSweep(Common),
    /// Tallied against closed-form operation counts.
    Opcounts(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Design(a) => (Some(ExperimentKind::Design), a),
        Command::Measure(a) => (Some(ExperimentKind::Measure), a),
        Command::Run(a) => (None, a),
        Command::Grid(a) => (Some(ExperimentKind::Grid), a),
        Command::ApproxSweep(a) => (Some(ExperimentKind::ApproxSweep), a),
        Command::NSweep(a) => (Some(ExperimentKind::Nsweep), a),
        Command::Opcounts(a) => (Some(ExperimentKind::Opcounts), a),
    };
    match execute(kind, &args) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} failed cells");
            ExitCode::from(2)
        }
        Err(HarnessError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(kind: Option<ExperimentKind>, args: &Common) -> Result<usize, HarnessError> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if let Some(k) = kind {
        cfg.experiment = k;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let out = run(&cfg, args.full)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    for p in out.write(&args.out)? {
        println!("{}", p.display());
    }
    Ok(out.failed_cells)
}
