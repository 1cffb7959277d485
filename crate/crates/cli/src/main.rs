use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wrglauber::{parse_config, run_experiment, CliError, ExperimentKind, RunOptions};

#[derive(Parser)]
#[command(name = "wrglauber", about = "Two-species Glauber dynamics with mutations", version = wrglauber::VERSION)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the regime inequalities.
    Check(Common),
    /// Run the stochastic simulation.
    Simulate(Common),
    /// Integrate the kinetic equations.
    Kinetics(Common),
    /// Find a stationary point and its stability.
    Stationary(Common),
    /// Compare rescaled simulations with the kinetic limit.
    Mesoscopic(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; overrides `schedule.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    parallel: usize,
}

fn execute(kind: ExperimentKind, args: Common) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let mut spec = parse_config(&text).map_err(CliError::Config)?;
    spec.experiment = kind;
    if let Some(out) = args.out {
        spec.output_dir = Some(out);
    }
    if let Some(seed) = args.seed {
        spec.schedule.seed = seed;
    }
    let violations = spec.constraint_violations();
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.into_iter().map(|(_, m)| m).collect();
        return Err(CliError::Validation(msgs.join("\n")));
    }
    let manifest = run_experiment(&spec, &RunOptions { parallel: args.parallel })?;
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    let dir = spec.output_dir.as_deref().map(|p| p.display().to_string()).unwrap_or_default();
    println!("{} finished: {} files in {dir}", kind, manifest.files.len() + 1);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Check(a) => (ExperimentKind::Check, a),
        Command::Simulate(a) => (ExperimentKind::Simulate, a),
        Command::Kinetics(a) => (ExperimentKind::Kinetics, a),
        Command::Stationary(a) => (ExperimentKind::Stationary, a),
        Command::Mesoscopic(a) => (ExperimentKind::Mesoscopic, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
