//! `otuniq`: solve finite transport problems and certify whether their
//! Kantorovich potentials are unique.
//!
//! Exit statuses: 0 success or unique, 10 non-unique, 11 inconclusive,
//! 20 oracle disagreement, 2 parse or usage error, 3 solver error, 1 other.

mod commands;
mod document;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use otuniq::Direction;

use crate::commands::{CertifyArgs, CtransformArgs, RegularityArgs, SolveArgs, WitnessArgs};

#[derive(Parser)]
#[command(name = "otuniq", version, about = "Uniqueness certificates for optimal transport potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    /// Source values to target values.
    ToTarget,
    /// Target values to source values.
    ToSource,
}

#[derive(Args)]
struct DecompositionArgs {
    /// Join points closer than this distance into one component.
    #[arg(long, conflicts_with = "labels")]
    epsilon: Option<f64>,
    /// Use the component labels in the problem document.
    #[arg(long)]
    labels: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem and write the plan and potentials.
    Solve {
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Solve in exact rational arithmetic.
        #[arg(long)]
        exact: bool,
        /// Verify every potential pair found in this document against the optimum.
        #[arg(long)]
        verify: Option<PathBuf>,
    },
    /// Decide whether the optimal potentials are unique.
    Certify {
        problem: PathBuf,
        #[command(flatten)]
        decomposition: DecompositionArgs,
        /// Cross-check the verdict with the dual-face and tight-graph oracles.
        #[arg(long, value_enum, default_value = "on")]
        oracle: Switch,
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the two-level family of optimal potentials on a two-cluster instance.
    Witness {
        problem: PathBuf,
        #[command(flatten)]
        decomposition: DecompositionArgs,
        #[arg(long, default_value_t = 25)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "on")]
        oracle: Switch,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a regularity diagnostic described by a task document.
    Regularity {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a c-transform at the points of the other side.
    Ctransform {
        problem: PathBuf,
        /// JSON array of input values; zero when omitted.
        #[arg(long)]
        values: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "to-target")]
        direction: DirectionArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<i32, error::CliError> {
    match cli.command {
        Command::Solve { problem, out, exact, verify } => {
            commands::cmd_solve(&SolveArgs { problem: &problem, out: out.as_deref(), exact, verify: verify.as_deref() })
        }
        Command::Certify { problem, decomposition, oracle, exact, out } => commands::cmd_certify(&CertifyArgs {
            problem: &problem,
            out: out.as_deref(),
            epsilon: decomposition.epsilon,
            labels: decomposition.labels,
            oracle: oracle == Switch::On,
            exact,
        }),
        Command::Witness { problem, decomposition, samples, seed, oracle, out } => commands::cmd_witness(&WitnessArgs {
            problem: &problem,
            out: out.as_deref(),
            epsilon: decomposition.epsilon,
            labels: decomposition.labels,
            oracle: oracle == Switch::On,
            samples,
            seed,
        }),
        Command::Regularity { spec, out } => commands::cmd_regularity(&RegularityArgs { spec: &spec, out: out.as_deref() }),
        Command::Ctransform { problem, values, direction, out } => commands::cmd_ctransform(&CtransformArgs {
            problem: &problem,
            out: out.as_deref(),
            values: values.as_deref(),
            direction: match direction {
                DirectionArg::ToTarget => Direction::ToTarget,
                DirectionArg::ToSource => Direction::ToSource,
            },
        }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("OTUNIQ_LOG", "warn")).init();
    let cli = Cli::parse();
    let status = match run(cli) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("otuniq: error[{}]: {e}", e.code());
            e.exit_code()
        }
    };
    ExitCode::from(status as u8)
}
