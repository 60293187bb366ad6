//! Runs the bundled scenario fixtures end to end and checks the documented
//! failure-injection behaviour: babbling, sudden silence, slow links and
//! staggered power-up, plus replay determinism and virtual/real agreement.

use std::fs;
use std::path::{Path, PathBuf};

use votekit_core::config::load_config;
use votekit_core::model::{HealthState, OutcomeStatus, RejectReason, SensorId, VoteProfileConfig};
use votekit_core::sim::scenario::{parse_scenario, resolve_scenario, ClockMode};
use votekit_core::sim::{run_scenario, ScenarioRun};

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn prototype_profile() -> VoteProfileConfig {
    let text = fs::read_to_string(scenarios_dir().join("prototype.toml")).unwrap();
    let mut profiles = load_config(&text).unwrap();
    assert_eq!(profiles.len(), 1);
    profiles.remove(0)
}

fn run_fixture(name: &str) -> ScenarioRun {
    let text = fs::read_to_string(scenarios_dir().join(name)).unwrap();
    let file = parse_scenario(&text).unwrap();
    let spec = resolve_scenario(&file, &prototype_profile(), None, None).unwrap();
    run_scenario(&spec).unwrap()
}

fn statuses(run: &ScenarioRun) -> Vec<OutcomeStatus> {
    run.records.iter().map(|r| r.outcome.status).collect()
}

fn rejection_reasons(run: &ScenarioRun, cycle: u64, sensor: u16) -> Vec<RejectReason> {
    run.records[cycle as usize]
        .outcome
        .rejections
        .iter()
        .filter(|r| r.sensor_id == SensorId(sensor))
        .map(|r| r.reason)
        .collect()
}

#[test]
fn nominal_run_stays_valid_with_bounded_noise() {
    let run = run_fixture("nominal.toml");
    assert_eq!(run.records.len(), 50);
    assert_eq!(run.dropped_frames, 0);
    for record in &run.records {
        assert_eq!(record.outcome.status, OutcomeStatus::Valid);
        let value = record.outcome.value.unwrap();
        assert!(
            (value - 21.0).abs() <= 0.16,
            "cycle {}: voted {value} strays past the noise band",
            record.cycle
        );
        assert_eq!(record.outcome.contributors.len(), 3);
        assert!(record.health_transitions.is_empty());
    }
    for record in run.final_health.values() {
        assert_eq!(record.state, HealthState::Good);
        assert_eq!(record.bad_episodes, 0);
    }
}

#[test]
fn babbling_sensor_is_rejected_and_degrades_on_schedule() {
    let run = run_fixture("babble.toml");
    for record in &run.records {
        let cycle = record.cycle;
        if cycle < 10 {
            assert_eq!(record.outcome.status, OutcomeStatus::Valid, "cycle {cycle}");
        } else {
            assert_eq!(
                record.outcome.status,
                OutcomeStatus::Degraded,
                "cycle {cycle}"
            );
            assert_eq!(rejection_reasons(&run, cycle, 2), vec![RejectReason::Babble]);
            assert_eq!(
                record.outcome.contributors,
                vec![SensorId(1), SensorId(3)],
                "cycle {cycle}"
            );
        }
        assert!(record.outcome.value.is_some(), "cycle {cycle} lost the value");
    }

    // badThreshold consecutive babbling cycles starting at 10 land the
    // transition exactly at cycle 10 + badThreshold - 1 = 11.
    let transitions: Vec<(u64, SensorId, HealthState, HealthState)> = run
        .records
        .iter()
        .flat_map(|r| {
            r.health_transitions
                .iter()
                .map(move |t| (r.cycle, t.sensor_id, t.from, t.to))
        })
        .collect();
    assert_eq!(
        transitions,
        vec![(11, SensorId(2), HealthState::Good, HealthState::Bad)]
    );
    let babbler = &run.final_health[&SensorId(2)];
    assert_eq!(babbler.state, HealthState::Bad);
    assert_eq!(babbler.bad_episodes, 1);
}

#[test]
fn silent_sensor_escalates_from_timeout_to_stale() {
    let run = run_fixture("silent.toml");
    for cycle in 0..20u64 {
        assert_eq!(run.records[cycle as usize].outcome.status, OutcomeStatus::Valid);
    }
    for cycle in 20..40u64 {
        let record = &run.records[cycle as usize];
        assert_eq!(record.outcome.status, OutcomeStatus::Degraded, "cycle {cycle}");
        assert_eq!(record.outcome.value, Some(21.0));
        let expected = if cycle < 22 {
            RejectReason::Timeout
        } else {
            RejectReason::Stale
        };
        assert_eq!(rejection_reasons(&run, cycle, 3), vec![expected], "cycle {cycle}");
    }
    let transitions: Vec<(u64, SensorId)> = run
        .records
        .iter()
        .flat_map(|r| r.health_transitions.iter().map(move |t| (r.cycle, t.sensor_id)))
        .collect();
    assert_eq!(transitions, vec![(21, SensorId(3))]);
    assert_eq!(run.final_health[&SensorId(3)].state, HealthState::Bad);
    assert_eq!(run.final_health[&SensorId(3)].bad_episodes, 1);
}

#[test]
fn delayed_sensor_contributes_with_one_cycle_of_lag() {
    let run = run_fixture("delay.toml");
    for record in &run.records {
        let cycle = record.cycle;
        match cycle {
            5 => {
                assert_eq!(record.outcome.status, OutcomeStatus::Degraded);
                assert_eq!(
                    rejection_reasons(&run, cycle, 2),
                    vec![RejectReason::Timeout]
                );
            }
            _ => {
                assert_eq!(record.outcome.status, OutcomeStatus::Valid, "cycle {cycle}");
                assert_eq!(record.outcome.value, Some(21.0));
            }
        }
    }
    // After the onset the delayed response always answers the previous poll.
    for record in run.records.iter().filter(|r| r.cycle >= 6) {
        let sample = record
            .samples
            .iter()
            .find(|s| s.sensor_id == SensorId(2))
            .expect("delayed sensor delivers every cycle after onset");
        assert_eq!(sample.seq as u64, record.cycle, "lagging by exactly one poll");
    }
    assert!(run.records.iter().all(|r| r.health_transitions.is_empty()));
    assert_eq!(run.final_health[&SensorId(2)].bad_episodes, 0);
}

#[test]
fn powerup_before_controller_is_immediately_valid() {
    let run = run_fixture("powerup_before.toml");
    assert!(statuses(&run).iter().all(|&s| s == OutcomeStatus::Valid));
    assert!(run.records.iter().all(|r| r.health_transitions.is_empty()));
    for record in run.final_health.values() {
        assert_eq!(record.state, HealthState::Good);
        assert_eq!(record.bad_episodes, 0);
    }
}

#[test]
fn powerup_simultaneous_converges_without_bad_episodes() {
    let run = run_fixture("powerup_simultaneous.toml");
    for record in &run.records {
        let expected = if record.cycle < 5 {
            OutcomeStatus::InsufficientSensors
        } else {
            OutcomeStatus::Valid
        };
        assert_eq!(record.outcome.status, expected, "cycle {}", record.cycle);
    }
    // Pre-start silence degrades the records but, having never responded,
    // they accrue no bad episodes and rehabilitate after the start.
    for record in run.final_health.values() {
        assert_eq!(record.state, HealthState::Good);
        assert_eq!(record.bad_episodes, 0);
    }
    let rehab_cycles: Vec<u64> = run
        .records
        .iter()
        .flat_map(|r| {
            r.health_transitions
                .iter()
                .filter(|t| t.to == HealthState::Good)
                .map(move |_| r.cycle)
        })
        .collect();
    assert_eq!(rehab_cycles, vec![7, 7, 7]);
}

#[test]
fn powerup_late_starter_joins_and_rehabilitates() {
    let run = run_fixture("powerup_late.toml");
    for record in &run.records {
        let expected = if record.cycle < 8 {
            OutcomeStatus::Degraded
        } else {
            OutcomeStatus::Valid
        };
        assert_eq!(record.outcome.status, expected, "cycle {}", record.cycle);
        assert!(record.outcome.value.is_some());
    }
    let late = &run.final_health[&SensorId(3)];
    assert_eq!(late.state, HealthState::Good);
    assert_eq!(late.bad_episodes, 0);
    // BAD while silent, rehabilitated rehabThreshold cycles after cycle 8.
    let sensor3_transitions: Vec<(u64, HealthState)> = run
        .records
        .iter()
        .flat_map(|r| {
            r.health_transitions
                .iter()
                .filter(|t| t.sensor_id == SensorId(3))
                .map(move |t| (r.cycle, t.to))
        })
        .collect();
    assert_eq!(
        sensor3_transitions,
        vec![(1, HealthState::Bad), (10, HealthState::Good)]
    );
}

#[test]
fn identical_seeds_replay_identically() {
    let first = run_fixture("nominal.toml");
    let second = run_fixture("nominal.toml");
    assert_eq!(first, second);
}

#[test]
fn seed_override_changes_noise_but_not_structure() {
    let text = fs::read_to_string(scenarios_dir().join("nominal.toml")).unwrap();
    let file = parse_scenario(&text).unwrap();
    let profile = prototype_profile();
    let base = run_scenario(&resolve_scenario(&file, &profile, None, None).unwrap()).unwrap();
    let reseeded =
        run_scenario(&resolve_scenario(&file, &profile, Some(99), None).unwrap()).unwrap();
    assert_ne!(base, reseeded, "override must reroll the noise");
    assert!(statuses(&reseeded).iter().all(|&s| s == OutcomeStatus::Valid));
}

#[test]
fn real_clock_matches_virtual_clock_on_a_short_run() {
    // Stock 20 ms cycles leave ample scheduling margin; 20 cycles keep the
    // wall-clock portion of the suite at 400 ms per attempt. The host can
    // stall the whole process for tens of milliseconds at a time, which
    // starves every socket at once, so the wall-clock run gets a few
    // attempts before a mismatch counts as a failure.
    let profile = prototype_profile();
    let file = votekit_core::sim::scenario::constant_scenario(&profile, 20, 21.0);
    let virtual_run =
        run_scenario(&resolve_scenario(&file, &profile, None, Some(ClockMode::Virtual)).unwrap())
            .unwrap();

    let mut last_mismatch = None;
    for _ in 0..5 {
        let real_run =
            run_scenario(&resolve_scenario(&file, &profile, None, Some(ClockMode::Real)).unwrap())
                .unwrap();
        let same = virtual_run.records.len() == real_run.records.len()
            && virtual_run
                .records
                .iter()
                .zip(&real_run.records)
                .all(|(v, r)| {
                    v.outcome == r.outcome && v.health_transitions == r.health_transitions
                })
            && virtual_run.final_health == real_run.final_health;
        if same {
            return;
        }
        last_mismatch = Some(real_run);
    }
    let real_run = last_mismatch.unwrap();
    for (v, r) in virtual_run.records.iter().zip(&real_run.records) {
        assert_eq!(v.outcome, r.outcome, "cycle {}", v.cycle);
    }
    panic!("real-clock run never matched the virtual reference");
}
