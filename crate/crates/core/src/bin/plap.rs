use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use plap_core::run::{run, Experiment, Invocation};

#[derive(Parser)]
#[command(name = "plap", version, about = "Regularity experiments for the parabolic p-Laplace equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat TOML config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for random jet sampling (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory
    #[arg(long, global = true, default_value = "plap-out")]
    out: PathBuf,

    /// KEY=VALUE config override, value in TOML syntax (repeatable)
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Solve the regularized equation and compare with the exact solution
    Solve,
    /// Evaluate a Caccioppoli-type estimate on a solved or exact field
    VerifyEstimate,
    /// Refinement sweep of the counterexample integral across s
    Sharpness,
    /// Randomized pointwise inequality suite
    JetProptest,
    /// Time-derivative estimate and pointwise residual
    TimeDerivative,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let experiment = match cli.command {
        Command::Solve => Experiment::Solve,
        Command::VerifyEstimate => Experiment::VerifyEstimate,
        Command::Sharpness => Experiment::Sharpness,
        Command::JetProptest => Experiment::JetProptest,
        Command::TimeDerivative => Experiment::TimeDerivative,
    };
    let code = run(&Invocation {
        experiment,
        config: cli.config,
        seed: cli.seed,
        out: cli.out,
        overrides: cli.overrides,
    });
    ExitCode::from(code as u8)
}
