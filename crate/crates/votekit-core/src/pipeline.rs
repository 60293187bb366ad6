//! The four-stage voting pipeline and the per-cycle voting manager.
//!
//! Stage order per cycle: input_data (behavioural acceptability) ->
//! input_vote (value plausibility) -> output_vote (voting algorithm) ->
//! output_data (output plausibility). `voting_manager` is exactly that
//! composition plus cycle-boundary bookkeeping: latching staged writes
//! before the stages and feeding health verdicts after them.

use std::collections::BTreeMap;

use crate::health::{record_cycle_verdict, Verdict};
use crate::model::{
    OutcomeStatus, RejectReason, Rejection, SensorSample, StagePartition, VoteOutcome,
};
use crate::model::{HealthState, SensorId};
use crate::profile::VoteProfile;
use crate::voters::{
    exact_majority, median_vote, moon_bounded_median, weighted_cluster_vote, Ballot,
};
use crate::model::AlgorithmKind;

/// Everything one cycle presents to the pipeline: the cycle number, its
/// start on the scenario clock and all frames received in the voting window.
#[derive(Debug, Clone)]
pub struct CycleContext {
    pub cycle: u64,
    pub cycle_start_micros: u64,
    pub samples: Vec<SensorSample>,
    /// Snapshot of consecutive missed cycles per sensor at cycle start,
    /// for diagnostics; the pipeline tracks its own counters.
    pub missed_by: BTreeMap<SensorId, u32>,
}

impl CycleContext {
    pub fn new(cycle: u64, cycle_start_micros: u64, samples: Vec<SensorSample>) -> Self {
        CycleContext {
            cycle,
            cycle_start_micros,
            samples,
            missed_by: BTreeMap::new(),
        }
    }

    pub fn for_profile(
        cycle: u64,
        cycle_start_micros: u64,
        samples: Vec<SensorSample>,
        profile: &VoteProfile,
    ) -> Self {
        let missed_by = profile
            .runtime
            .iter()
            .map(|(&id, rt)| (id, rt.missed_cycles))
            .collect();
        CycleContext {
            cycle,
            cycle_start_micros,
            samples,
            missed_by,
        }
    }
}

/// Stage 1: behavioural acceptability.
///
/// Each configured sensor ends up either with exactly one accepted sample or
/// with one rejection. Checks run in a fixed order and the first failure
/// wins: UNUSABLE_SENSOR, then TIMEOUT/STALE (no in-window frame), then
/// BABBLE (too many frames), then BAD_SEQUENCE (no sequence progress).
pub fn input_data(ctx: &CycleContext, profile: &mut VoteProfile) -> StagePartition {
    let active = &profile.active;
    let health = &mut profile.health;
    let runtime = &mut profile.runtime;
    let acc = &active.acceptability;
    let mut partition = StagePartition::default();

    for descriptor in &active.sensors {
        let id = descriptor.id;
        let record = health.get_mut(&id).expect("record per configured sensor");
        if record.state == HealthState::Unusable {
            partition.bad.push(Rejection {
                sensor_id: id,
                reason: RejectReason::UnusableSensor,
                cycle: ctx.cycle,
                detail: "sensor is quarantined pending maintenance".to_string(),
            });
            continue;
        }

        let frames: Vec<&SensorSample> =
            ctx.samples.iter().filter(|s| s.sensor_id == id).collect();
        if !frames.is_empty() {
            record.mark_contact();
        }
        let runtime = runtime.get_mut(&id).expect("runtime per configured sensor");

        let in_window: Vec<&SensorSample> = frames
            .iter()
            .copied()
            .filter(|s| {
                s.receive_time_micros >= ctx.cycle_start_micros
                    && s.receive_time_micros - ctx.cycle_start_micros
                        <= acc.response_timeout_micros
            })
            .collect();

        if in_window.is_empty() {
            runtime.missed_cycles += 1;
            let missed = runtime.missed_cycles;
            let (reason, detail) = if missed >= acc.stale_limit {
                (
                    RejectReason::Stale,
                    format!("no response for {missed} consecutive cycles"),
                )
            } else {
                (
                    RejectReason::Timeout,
                    format!(
                        "no response within {} us of cycle start",
                        acc.response_timeout_micros
                    ),
                )
            };
            partition.bad.push(Rejection {
                sensor_id: id,
                reason,
                cycle: ctx.cycle,
                detail,
            });
            continue;
        }
        runtime.missed_cycles = 0;

        let total_frames = frames.len() as u32;
        if total_frames > acc.max_frames_per_cycle {
            partition.bad.push(Rejection {
                sensor_id: id,
                reason: RejectReason::Babble,
                cycle: ctx.cycle,
                detail: format!(
                    "{} frames in one cycle exceed the limit of {}",
                    total_frames, acc.max_frames_per_cycle
                ),
            });
            continue;
        }

        let candidate = in_window
            .iter()
            .copied()
            .max_by_key(|s| (s.receive_time_micros, s.seq))
            .expect("in_window is non-empty");
        if candidate.seq <= runtime.last_seq {
            partition.bad.push(Rejection {
                sensor_id: id,
                reason: RejectReason::BadSequence,
                cycle: ctx.cycle,
                detail: format!(
                    "sequence {} does not advance past {}",
                    candidate.seq, runtime.last_seq
                ),
            });
            continue;
        }
        runtime.last_seq = candidate.seq;

        let mut sample = candidate.clone();
        sample.frame_count_this_cycle = total_frames;
        partition.good.push(sample);
    }
    partition
}

/// Stage 2: value plausibility. Range first, then rate of change against
/// the last plausible value (scaled by the cycles elapsed since it).
pub fn input_vote(
    ctx: &CycleContext,
    partition: StagePartition,
    profile: &mut VoteProfile,
) -> StagePartition {
    let active = &profile.active;
    let runtime = &mut profile.runtime;
    let mut out = StagePartition {
        good: Vec::new(),
        bad: partition.bad,
    };

    for sample in partition.good {
        let id = sample.sensor_id;
        let descriptor = active.sensor(id).expect("stage 1 only passes configured sensors");
        let ch = &descriptor.characteristics;

        if sample.eng_value < ch.plausible_min || sample.eng_value > ch.plausible_max {
            out.bad.push(Rejection {
                sensor_id: id,
                reason: RejectReason::OutOfRange,
                cycle: ctx.cycle,
                detail: format!(
                    "{} outside [{}, {}]",
                    sample.eng_value, ch.plausible_min, ch.plausible_max
                ),
            });
            continue;
        }

        let runtime = runtime.get_mut(&id).expect("runtime per configured sensor");
        if let Some(previous) = runtime.last_plausible {
            let cycles = ctx.cycle.saturating_sub(previous.cycle).max(1);
            let allowed = ch.max_delta_per_cycle * cycles as f64;
            let delta = (sample.eng_value - previous.value).abs();
            if delta > allowed {
                out.bad.push(Rejection {
                    sensor_id: id,
                    reason: RejectReason::RateExceeded,
                    cycle: ctx.cycle,
                    detail: format!(
                        "change of {delta} over {cycles} cycle(s) exceeds {allowed}"
                    ),
                });
                continue;
            }
        }
        runtime.last_plausible = Some(crate::profile::PlausiblePoint {
            cycle: ctx.cycle,
            value: sample.eng_value,
        });
        out.good.push(sample);
    }
    out
}

/// Stage 3: the configured voting algorithm over the surviving samples.
pub fn output_vote(
    ctx: &CycleContext,
    partition: StagePartition,
    profile: &VoteProfile,
) -> VoteOutcome {
    let active = &profile.active;
    let algorithm = &active.algorithm;
    let StagePartition { good, bad } = partition;

    if (good.len() as u32) < algorithm.m {
        return VoteOutcome {
            status: OutcomeStatus::InsufficientSensors,
            value: None,
            contributors: Vec::new(),
            rejections: bad,
            cycle: ctx.cycle,
        };
    }

    let ballots: Vec<Ballot> = good
        .iter()
        .map(|s| {
            let weight = active
                .sensor(s.sensor_id)
                .map(|d| d.weight)
                .unwrap_or(1.0);
            Ballot::new(s.sensor_id, s.eng_value, weight)
        })
        .collect();

    let voted = match algorithm.kind {
        AlgorithmKind::Median => median_vote(&ballots),
        AlgorithmKind::MoonBoundedMedian => {
            moon_bounded_median(&ballots, algorithm.m, algorithm.n, algorithm.epsilon)
        }
        AlgorithmKind::WeightedCluster => weighted_cluster_vote(&ballots, algorithm.epsilon),
        AlgorithmKind::ExactMajority => exact_majority(&ballots),
    };

    match voted {
        Ok(result) if result.valid => {
            let status = if good.len() == active.sensors.len() {
                OutcomeStatus::Valid
            } else {
                OutcomeStatus::Degraded
            };
            VoteOutcome {
                status,
                value: result.value,
                contributors: result.cluster,
                rejections: bad,
                cycle: ctx.cycle,
            }
        }
        _ => VoteOutcome {
            status: OutcomeStatus::NoConsensus,
            value: None,
            contributors: Vec::new(),
            rejections: bad,
            cycle: ctx.cycle,
        },
    }
}

/// Stage 4: output plausibility. An implausible voted value is withdrawn
/// entirely; no value and no contributors are published.
pub fn output_data(mut outcome: VoteOutcome, profile: &VoteProfile) -> VoteOutcome {
    if let Some(value) = outcome.value {
        let range = &profile.active.output;
        if value < range.plausible_min || value > range.plausible_max {
            outcome.status = OutcomeStatus::ImplausibleOutput;
            outcome.value = None;
            outcome.contributors = Vec::new();
        }
    }
    outcome
}

/// Runs one complete cycle: latch staged writes, run the four stages, feed
/// health verdicts, publish the outcome on the profile.
///
/// Every configured sensor receives exactly one verdict per cycle — good
/// when its sample survived both input stages — except UNUSABLE sensors,
/// whose records are frozen until maintenance.
pub fn voting_manager(ctx: &CycleContext, profile: &mut VoteProfile) -> VoteOutcome {
    profile.apply_pending_writes();

    let after_input_data = input_data(ctx, profile);
    let after_input_vote = input_vote(ctx, after_input_data, profile);
    let survivors: Vec<SensorId> = after_input_vote.good.iter().map(|s| s.sensor_id).collect();
    let outcome = output_vote(ctx, after_input_vote, profile);
    let outcome = output_data(outcome, profile);

    let params = profile.active.health.clone();
    for descriptor in &profile.active.sensors {
        let record = profile
            .health
            .get_mut(&descriptor.id)
            .expect("record per configured sensor");
        if record.state == HealthState::Unusable {
            continue;
        }
        let verdict = if survivors.contains(&descriptor.id) {
            Verdict::Good
        } else {
            Verdict::Bad
        };
        record_cycle_verdict(record, verdict, &params, ctx.cycle)
            .expect("non-frozen records accept verdicts");
    }

    profile.output_value = outcome.value;
    profile.last_outcome = Some(outcome.clone());
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::tests::valid_profile;
    use crate::model::HealthRecord;
    use crate::profile::VoteProfile;

    /// Handcrafted sample; test values are multiples of 0.25 so medians and
    /// deltas stay exact in binary floating point.
    fn sample(id: u16, seq: u32, t: u64, eng: f64) -> SensorSample {
        SensorSample {
            sensor_id: SensorId(id),
            seq,
            receive_time_micros: t,
            raw_value: (eng / 0.1).round() as i32,
            eng_value: eng,
            frame_count_this_cycle: 1,
        }
    }

    fn fresh_profile() -> VoteProfile {
        VoteProfile::new(valid_profile())
    }

    fn ctx_with(cycle: u64, samples: Vec<SensorSample>) -> CycleContext {
        CycleContext::new(cycle, cycle * 20_000, samples)
    }

    #[test]
    fn nominal_cycle_is_valid() {
        let mut profile = fresh_profile();
        let ctx = ctx_with(
            0,
            vec![
                sample(1, 1, 100, 20.0),
                sample(2, 1, 120, 20.5),
                sample(3, 1, 140, 20.25),
            ],
        );
        let outcome = voting_manager(&ctx, &mut profile);
        assert_eq!(outcome.status, OutcomeStatus::Valid);
        assert_eq!(outcome.value, Some(20.25));
        assert_eq!(
            outcome.contributors,
            vec![SensorId(1), SensorId(2), SensorId(3)]
        );
        assert!(outcome.rejections.is_empty());
        assert_eq!(profile.output_value(), Some(20.25));
    }

    #[test]
    fn missing_sensor_degrades_but_votes() {
        let mut profile = fresh_profile();
        let ctx = ctx_with(0, vec![sample(1, 1, 100, 20.0), sample(2, 1, 120, 20.5)]);
        let outcome = voting_manager(&ctx, &mut profile);
        assert_eq!(outcome.status, OutcomeStatus::Degraded);
        assert_eq!(outcome.value, Some(20.25));
        assert_eq!(outcome.rejections.len(), 1);
        assert_eq!(outcome.rejections[0].sensor_id, SensorId(3));
        assert_eq!(outcome.rejections[0].reason, RejectReason::Timeout);
    }

    #[test]
    fn timeout_escalates_to_stale_at_the_limit() {
        // staleLimit is 3: two TIMEOUT cycles, STALE from the third on.
        let mut profile = fresh_profile();
        for cycle in 0..4 {
            let ctx = CycleContext::new(
                cycle,
                cycle * 20_000,
                vec![
                    sample(1, cycle as u32 + 1, cycle * 20_000 + 100, 20.0),
                    sample(2, cycle as u32 + 1, cycle * 20_000 + 120, 20.0),
                ],
            );
            let outcome = voting_manager(&ctx, &mut profile);
            let reason = outcome.rejections[0].reason;
            if cycle < 2 {
                assert_eq!(reason, RejectReason::Timeout, "cycle {cycle}");
            } else {
                assert_eq!(reason, RejectReason::Stale, "cycle {cycle}");
            }
        }
    }

    #[test]
    fn late_frame_is_a_timeout() {
        let mut profile = fresh_profile();
        // responseTimeoutMicros is 10_000; 12_000 is too late.
        let ctx = ctx_with(
            0,
            vec![
                sample(1, 1, 100, 20.0),
                sample(2, 1, 120, 20.0),
                sample(3, 1, 12_000, 20.0),
            ],
        );
        let outcome = voting_manager(&ctx, &mut profile);
        assert_eq!(outcome.rejections.len(), 1);
        assert_eq!(outcome.rejections[0].reason, RejectReason::Timeout);
    }

    #[test]
    fn babble_discards_every_frame() {
        let mut profile = fresh_profile();
        // maxFramesPerCycle is 2; three frames from sensor 1 are babble,
        // even though each alone would be acceptable.
        let ctx = ctx_with(
            0,
            vec![
                sample(1, 1, 100, 20.0),
                sample(1, 1, 110, 20.0),
                sample(1, 1, 125, 20.0),
                sample(2, 1, 120, 20.5),
                sample(3, 1, 140, 20.25),
            ],
        );
        let outcome = voting_manager(&ctx, &mut profile);
        assert_eq!(outcome.status, OutcomeStatus::Degraded);
        assert_eq!(outcome.rejections[0].reason, RejectReason::Babble);
        assert_eq!(outcome.contributors, vec![SensorId(2), SensorId(3)]);
    }

    #[test]
    fn stagnant_sequence_is_rejected() {
        let mut profile = fresh_profile();
        let first = ctx_with(
            0,
            vec![
                sample(1, 1, 100, 20.0),
                sample(2, 1, 120, 20.0),
                sample(3, 1, 140, 20.0),
            ],
        );
        voting_manager(&first, &mut profile);
        // Sensor 1 repeats sequence 1 in cycle 1.
        let second = CycleContext::new(
            1,
            20_000,
            vec![
                sample(1, 1, 20_100, 20.0),
                sample(2, 2, 20_120, 20.0),
                sample(3, 2, 20_140, 20.0),
            ],
        );
        let outcome = voting_manager(&second, &mut profile);
        assert_eq!(outcome.rejections[0].reason, RejectReason::BadSequence);
        assert_eq!(outcome.rejections[0].sensor_id, SensorId(1));
    }

    #[test]
    fn out_of_range_value_is_rejected() {
        let mut profile = fresh_profile();
        let ctx = ctx_with(
            0,
            vec![
                sample(1, 1, 100, 20.0),
                sample(2, 1, 120, 20.5),
                sample(3, 1, 140, 500.0),
            ],
        );
        let outcome = voting_manager(&ctx, &mut profile);
        assert_eq!(outcome.status, OutcomeStatus::Degraded);
        assert_eq!(outcome.rejections[0].reason, RejectReason::OutOfRange);
    }

    #[test]
    fn rate_check_scales_with_elapsed_cycles() {
        let mut profile = fresh_profile();
        let ctx0 = ctx_with(
            0,
            vec![
                sample(1, 1, 100, 20.0),
                sample(2, 1, 120, 20.0),
                sample(3, 1, 140, 20.0),
            ],
        );
        voting_manager(&ctx0, &mut profile);
        // maxDeltaPerCycle is 2.0. Sensor 1 misses cycles 1-2, then returns
        // at cycle 3 with +5.0: allowed drift is 3 cycles * 2.0 = 6.0.
        for cycle in 1..3u64 {
            let ctx = CycleContext::new(
                cycle,
                cycle * 20_000,
                vec![
                    sample(2, cycle as u32 + 1, cycle * 20_000 + 120, 20.0),
                    sample(3, cycle as u32 + 1, cycle * 20_000 + 140, 20.0),
                ],
            );
            voting_manager(&ctx, &mut profile);
        }
        let ctx3 = CycleContext::new(
            3,
            60_000,
            vec![
                sample(1, 4, 60_100, 25.0),
                sample(2, 4, 60_120, 20.0),
                sample(3, 4, 60_140, 20.0),
            ],
        );
        let outcome = voting_manager(&ctx3, &mut profile);
        assert!(
            outcome.rejections.is_empty(),
            "drift within the scaled budget passes: {:?}",
            outcome.rejections
        );

        // A one-cycle jump of the same size is rejected.
        let ctx4 = CycleContext::new(
            4,
            80_000,
            vec![
                sample(1, 5, 80_100, 30.5),
                sample(2, 5, 80_120, 20.0),
                sample(3, 5, 80_140, 20.0),
            ],
        );
        let outcome = voting_manager(&ctx4, &mut profile);
        assert_eq!(outcome.rejections[0].reason, RejectReason::RateExceeded);
    }

    #[test]
    fn insufficient_sensors_below_m() {
        let mut profile = fresh_profile();
        let ctx = ctx_with(0, vec![sample(1, 1, 100, 20.0)]);
        let outcome = voting_manager(&ctx, &mut profile);
        assert_eq!(outcome.status, OutcomeStatus::InsufficientSensors);
        assert_eq!(outcome.value, None);
        assert!(outcome.contributors.is_empty());
        assert_eq!(outcome.rejections.len(), 2);
    }

    #[test]
    fn no_consensus_when_survivors_disagree() {
        let mut profile = fresh_profile();
        let ctx = ctx_with(
            0,
            vec![
                sample(1, 1, 100, 10.0),
                sample(2, 1, 120, 50.0),
                sample(3, 1, 140, 90.0),
            ],
        );
        let outcome = voting_manager(&ctx, &mut profile);
        assert_eq!(outcome.status, OutcomeStatus::NoConsensus);
        assert_eq!(outcome.value, None);
    }

    #[test]
    fn implausible_output_is_withdrawn() {
        let mut profile = VoteProfile::new({
            let mut cfg = valid_profile();
            // Sensors may read down to -40 but the output must stay above 0.
            cfg.output.plausible_min = 0.0;
            cfg
        });
        let ctx = ctx_with(
            0,
            vec![
                sample(1, 1, 100, -10.0),
                sample(2, 1, 120, -10.5),
                sample(3, 1, 140, -10.25),
            ],
        );
        let outcome = voting_manager(&ctx, &mut profile);
        assert_eq!(outcome.status, OutcomeStatus::ImplausibleOutput);
        assert_eq!(outcome.value, None);
        assert!(outcome.contributors.is_empty());
        assert_eq!(profile.output_value(), None);
    }

    #[test]
    fn unusable_sensor_is_skipped_without_polling_state_changes() {
        let mut profile = fresh_profile();
        profile.health.insert(SensorId(2), {
            let mut rec = HealthRecord::new();
            rec.state = HealthState::Unusable;
            rec.bad_episodes = 3;
            rec
        });
        let ctx = ctx_with(
            0,
            vec![
                sample(1, 1, 100, 20.0),
                sample(2, 1, 120, 20.0),
                sample(3, 1, 140, 20.25),
            ],
        );
        let outcome = voting_manager(&ctx, &mut profile);
        assert_eq!(outcome.status, OutcomeStatus::Degraded);
        assert_eq!(outcome.rejections[0].reason, RejectReason::UnusableSensor);
        assert_eq!(outcome.contributors, vec![SensorId(1), SensorId(3)]);
        let rec = profile.health(SensorId(2)).unwrap();
        assert_eq!(rec.state, HealthState::Unusable);
        assert_eq!(rec.bad_episodes, 3, "frozen record is untouched");
        assert!(!rec.ever_responded, "no contact bookkeeping while quarantined");
    }

    #[test]
    fn manager_equals_stage_composition() {
        let samples = vec![
            sample(1, 1, 100, 20.0),
            sample(2, 1, 120, 23.0),
            sample(3, 1, 140, 20.3),
        ];
        let mut managed = fresh_profile();
        let outcome_managed =
            voting_manager(&ctx_with(0, samples.clone()), &mut managed);

        let mut composed = fresh_profile();
        composed.apply_pending_writes();
        let ctx = ctx_with(0, samples);
        let p1 = input_data(&ctx, &mut composed);
        let p2 = input_vote(&ctx, p1, &mut composed);
        let o3 = output_vote(&ctx, p2, &composed);
        let outcome_composed = output_data(o3, &composed);

        assert_eq!(outcome_managed, outcome_composed);
    }

    #[test]
    fn repeated_bad_cycles_degrade_health() {
        let mut profile = fresh_profile();
        // badThreshold is 2: sensor 3 silent for two cycles goes BAD.
        for cycle in 0..2u64 {
            let ctx = CycleContext::new(
                cycle,
                cycle * 20_000,
                vec![
                    sample(1, cycle as u32 + 1, cycle * 20_000 + 100, 20.0),
                    sample(2, cycle as u32 + 1, cycle * 20_000 + 120, 20.0),
                ],
            );
            voting_manager(&ctx, &mut profile);
        }
        assert_eq!(profile.health(SensorId(3)).unwrap().state, HealthState::Bad);
        assert_eq!(
            profile.health(SensorId(1)).unwrap().state,
            HealthState::Good
        );
    }

    #[test]
    fn pending_epsilon_write_applies_next_cycle() {
        let mut profile = fresh_profile();
        let spread = vec![
            sample(1, 1, 100, 20.0),
            sample(2, 1, 120, 22.0),
            sample(3, 1, 140, 24.0),
        ];
        let outcome = voting_manager(&ctx_with(0, spread), &mut profile);
        assert_eq!(outcome.status, OutcomeStatus::NoConsensus, "epsilon 0.5 is too tight");

        profile
            .object_write(
                crate::profile::OBJ_ALGORITHM_EPSILON,
                crate::profile::ObjectValue::Float(10.0),
            )
            .unwrap();
        let spread2 = vec![
            sample(1, 2, 20_100, 20.0),
            sample(2, 2, 20_120, 22.0),
            sample(3, 2, 20_140, 24.0),
        ];
        let outcome = voting_manager(
            &CycleContext::new(1, 20_000, spread2),
            &mut profile,
        );
        assert_eq!(outcome.status, OutcomeStatus::Valid);
        assert_eq!(outcome.value, Some(22.0));
    }
}
