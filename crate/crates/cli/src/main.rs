use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use satfront_cli::{execute, Invocation, Subcommand};

#[derive(Parser)]
#[command(name = "satfront", version, about = "Saturated nonlocal growth fronts: simulation, waves and studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Run the dynamics and write snapshots, saturation times and invariants.
    Simulate(Common),
    /// Compute c* and traveling-wave profiles.
    Wave(Common),
    /// Fit the front speed of a simulation against c*.
    Speed(Common),
    /// Distance between the gamma models and the saturated model.
    Converge(Common),
    /// Comparison run for two ordered initial states.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Command::Simulate(a) => (Subcommand::Simulate, a),
        Command::Wave(a) => (Subcommand::Wave, a),
        Command::Speed(a) => (Subcommand::Speed, a),
        Command::Converge(a) => (Subcommand::Converge, a),
        Command::Compare(a) => (Subcommand::Compare, a),
    };
    let inv = Invocation { command, config: args.config, out: args.out, threads: args.threads, seed: args.seed };
    ExitCode::from(execute(&inv) as u8)
}
