//! votekit: validate configurations, run scenarios, report on traces.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use votekit_cli::commands::{cmd_report, cmd_run, cmd_validate, RunArgs};
use votekit_core::sim::scenario::ClockMode;

#[derive(Parser)]
#[command(
    name = "votekit",
    about = "Voting framework for N-redundant distributed sensors",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration document and list every constraint violation.
    Validate {
        /// Configuration file (TOML with one or more [[profile]] tables).
        config: PathBuf,
    },
    /// Execute a scenario and print a summary.
    Run {
        /// Scenario file.
        scenario: PathBuf,
        /// Configuration file; overrides the scenario's configPath.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed; overrides the scenario's masterSeed.
        #[arg(long)]
        seed: Option<u64>,
        /// Clock mode; overrides the scenario's clockMode.
        #[arg(long, value_enum)]
        clock: Option<ClockArg>,
        /// Write a JSON Lines cycle trace to this path.
        #[arg(long = "trace-out")]
        trace: Option<PathBuf>,
    },
    /// Summarize a trace file.
    Report {
        /// Trace file produced by `run --trace-out`.
        trace: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ClockArg {
    Virtual,
    Real,
}

impl From<ClockArg> for ClockMode {
    fn from(arg: ClockArg) -> Self {
        match arg {
            ClockArg::Virtual => ClockMode::Virtual,
            ClockArg::Real => ClockMode::Real,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { config } => cmd_validate(&config),
        Command::Run {
            scenario,
            config,
            seed,
            clock,
            trace,
        } => cmd_run(&RunArgs {
            scenario_path: scenario,
            config_path: config,
            seed,
            clock: clock.map(ClockMode::from),
            trace_path: trace,
        }),
        Command::Report { trace } => cmd_report(&trace),
    };
    std::process::exit(code);
}
