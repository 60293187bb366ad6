//! Command implementations. Each returns the process exit code:
//!
//! * `validate`: 0 valid, 1 constraint violations, 2 unreadable or
//!   schema-invalid.
//! * `run`: 0 success, 1 invalid scenario or configuration, 3 transport or
//!   other runtime failure.
//! * `report`: 0 success, 1 unreadable or malformed trace.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use votekit_core::config::{load_config, ConfigError};
use votekit_core::model::VoteProfileConfig;
use votekit_core::sim::scenario::{parse_scenario, resolve_scenario, ClockMode};
use votekit_core::sim::{run_scenario, ScenarioRun, SimError};

use crate::report::{build_report, render_report};
use crate::trace::{trace_records, write_trace};

pub fn cmd_validate(config_path: &Path) -> i32 {
    let text = match std::fs::read_to_string(config_path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return 2;
        }
    };
    match load_config(&text) {
        Ok(profiles) => {
            println!(
                "configuration OK: {} profile(s), {} sensor(s)",
                profiles.len(),
                profiles.iter().map(|p| p.sensors.len()).sum::<usize>()
            );
            0
        }
        Err(ConfigError::Constraints(findings)) => {
            eprintln!("configuration invalid: {} finding(s)", findings.len());
            for finding in &findings {
                eprintln!("  {finding}");
            }
            1
        }
        Err(e @ ConfigError::Schema(_)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub struct RunArgs {
    pub scenario_path: PathBuf,
    pub config_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub clock: Option<ClockMode>,
    pub trace_path: Option<PathBuf>,
}

pub fn cmd_run(args: &RunArgs) -> i32 {
    match execute_run(args) {
        Ok(run) => {
            print_summary(&run);
            0
        }
        Err(RunFailure::Invalid(message)) => {
            eprintln!("error: {message}");
            1
        }
        Err(RunFailure::Runtime(message)) => {
            eprintln!("error: {message}");
            3
        }
    }
}

enum RunFailure {
    Invalid(String),
    Runtime(String),
}

fn execute_run(args: &RunArgs) -> Result<ScenarioRun, RunFailure> {
    let scenario_text = std::fs::read_to_string(&args.scenario_path)
        .map_err(|e| RunFailure::Invalid(format!("cannot read {}: {e}", args.scenario_path.display())))?;
    let scenario = parse_scenario(&scenario_text).map_err(|e| RunFailure::Invalid(e.to_string()))?;

    // --config wins over the path embedded in the scenario, which resolves
    // relative to the scenario file.
    let config_path = match (&args.config_path, &scenario.config_path) {
        (Some(explicit), _) => explicit.clone(),
        (None, Some(embedded)) => {
            let embedded = PathBuf::from(embedded);
            if embedded.is_absolute() {
                embedded
            } else {
                args.scenario_path
                    .parent()
                    .unwrap_or_else(|| Path::new("."))
                    .join(embedded)
            }
        }
        (None, None) => {
            return Err(RunFailure::Invalid(
                "no configuration: scenario has no configPath and --config was not given"
                    .to_string(),
            ))
        }
    };

    let config_text = std::fs::read_to_string(&config_path)
        .map_err(|e| RunFailure::Invalid(format!("cannot read {}: {e}", config_path.display())))?;
    let profiles = load_config(&config_text).map_err(|e| match &e {
        ConfigError::Constraints(findings) => {
            let detail = findings
                .iter()
                .map(|f| f.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            RunFailure::Invalid(format!("configuration invalid: {detail}"))
        }
        ConfigError::Schema(_) => RunFailure::Invalid(e.to_string()),
    })?;
    let profile: &VoteProfileConfig = profiles
        .iter()
        .find(|p| p.id == scenario.profile_id)
        .ok_or_else(|| {
            RunFailure::Invalid(format!(
                "configuration defines no profile {}",
                scenario.profile_id
            ))
        })?;

    let spec = resolve_scenario(&scenario, profile, args.seed, args.clock).map_err(|e| {
        RunFailure::Invalid(e.to_string())
    })?;
    let run = run_scenario(&spec).map_err(|e| match e {
        SimError::BindFailure(_) | SimError::Transport(_) => RunFailure::Runtime(e.to_string()),
        other => RunFailure::Invalid(other.to_string()),
    })?;

    if let Some(trace_path) = &args.trace_path {
        let file = File::create(trace_path).map_err(|e| {
            RunFailure::Runtime(format!("cannot write {}: {e}", trace_path.display()))
        })?;
        let records = trace_records(&run);
        write_trace(BufWriter::new(file), &records)
            .map_err(|e| RunFailure::Runtime(format!("trace write: {e}")))?;
    }
    Ok(run)
}

fn print_summary(run: &ScenarioRun) {
    use votekit_core::model::OutcomeStatus;
    let mut counts = std::collections::BTreeMap::new();
    for record in &run.records {
        *counts.entry(record.outcome.status).or_insert(0u64) += 1;
    }
    let histogram = OutcomeStatus::ALL
        .iter()
        .map(|s| format!("{}: {}", s, counts.get(s).copied().unwrap_or(0)))
        .collect::<Vec<_>>()
        .join(", ");
    println!("profile {}: {} cycles", run.profile_id, run.records.len());
    println!("outcomes: {histogram}");
    for (id, record) in &run.final_health {
        println!(
            "sensor {}: health {}, bad episodes {}",
            id, record.state, record.bad_episodes
        );
    }
    if run.dropped_frames > 0 {
        println!("dropped frames: {}", run.dropped_frames);
    }
}

pub fn cmd_report(trace_path: &Path) -> i32 {
    let file = match File::open(trace_path) {
        Ok(file) => file,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", trace_path.display());
            return 1;
        }
    };
    match crate::trace::read_trace(BufReader::new(file)) {
        Ok(records) => {
            print!("{}", render_report(&build_report(&records)));
            0
        }
        Err(e) => {
            eprintln!("error: malformed trace: {e}");
            1
        }
    }
}
