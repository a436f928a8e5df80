use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iontc::commands::{self, OptimizeArgs, Outcome};

/// Pulse-sequence compiler for trapped-ion quantum gates.
#[derive(Parser)]
#[command(name = "iontc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a sequence against a target, or check a golden registry.
    Verify(VerifyArgs),
    /// Search for a short sequence as configured in a .cfg file.
    Optimize(OptimizeCli),
    /// Apply a sequence to an input state.
    Simulate(SimulateArgs),
    /// List the named targets or print one.
    Targets {
        #[command(subcommand)]
        action: TargetsAction,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, required_unless_present = "registry", requires_all = ["target", "qubits"])]
    seq: Option<PathBuf>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    qubits: Option<usize>,
    /// Registry directory with manifest.txt; the built-in one if no value.
    #[arg(long, num_args = 0..=1, conflicts_with = "seq")]
    registry: Option<Option<PathBuf>>,
    /// Largest accepted shortfall below the maximum objective.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Args)]
struct OptimizeCli {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Independent runs with seeds seed, seed+1, ...; the best is kept.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    qubits: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    seq: PathBuf,
    #[arg(long)]
    qubits: usize,
    /// Bit string such as 101, or `;`-separated re,im amplitudes.
    #[arg(long)]
    state: Option<String>,
}

#[derive(Subcommand)]
enum TargetsAction {
    List,
    Show {
        name: String,
        #[arg(long)]
        qubits: usize,
    },
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Verify(a) => match (&a.registry, &a.seq) {
            (Some(dir), _) => commands::verify_registry(&mut out, dir.as_deref(), a.tolerance),
            (None, Some(seq)) => commands::verify(
                &mut out,
                seq,
                a.target.as_deref().unwrap_or_default(),
                a.qubits.unwrap_or_default(),
                a.tolerance,
            ),
            (None, None) => unreachable!("clap requires --seq or --registry"),
        },
        Command::Optimize(a) => commands::optimize_cmd(
            &mut out,
            OptimizeArgs {
                config: &a.config,
                seed: a.seed,
                restarts: a.restarts,
                target: a.target.as_deref(),
                qubits: a.qubits,
            },
        ),
        Command::Simulate(a) => {
            let zero = "0".repeat(a.qubits);
            let state = a.state.as_deref().unwrap_or(&zero);
            commands::simulate(&mut out, &a.seq, a.qubits, state)
        }
        Command::Targets { action } => match action {
            TargetsAction::List => commands::targets_list(&mut out),
            TargetsAction::Show { name, qubits } => commands::targets_show(&mut out, &name, qubits),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Met) => ExitCode::SUCCESS,
        Ok(Outcome::Missed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
