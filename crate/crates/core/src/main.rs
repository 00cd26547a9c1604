use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sdp_qmt::experiments::{exit_code, run_command, Command, Overrides};

/// Measurement tomography experiments driven by JSON configs.
#[derive(Parser)]
#[command(name = "qmt", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate ground truth and frequency tables.
    Simulate(Common),
    /// Fit the configured estimator to a stored frequency table.
    Fit(Common),
    /// Run the see-saw batch.
    Seesaw(Common),
    /// Time the estimators on random instances.
    Bench(Common),
    /// Run the scenario named in the config.
    Scenario(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Master seed, overriding the config
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// Repetitions per sweep cell, overriding the config
    #[arg(long)]
    reps: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Fit(a) => (Command::Fit, a),
        Cmd::Seesaw(a) => (Command::Seesaw, a),
        Cmd::Bench(a) => (Command::Bench, a),
        Cmd::Scenario(a) => (Command::Scenario, a),
    };
    let overrides = Overrides {
        seed: args.seed,
        out: args.out,
        reps: args.reps,
    };
    let outcome = run_command(command, &args.config, &overrides);
    match &outcome {
        Ok(o) if o.failed > 0 => eprintln!("{} of {} repetitions failed", o.failed, o.total),
        Ok(o) => eprintln!("{} repetitions completed", o.total),
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&outcome) as u8)
}
