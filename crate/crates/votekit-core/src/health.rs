//! Per-sensor health tracking: GOOD / BAD / UNUSABLE with hysteresis.
//!
//! One verdict per sensor per cycle drives the machine. Repeated bad cycles
//! degrade GOOD to BAD; repeated good cycles rehabilitate BAD to GOOD; a
//! sensor that keeps flapping accumulates bad episodes until a degradation
//! lands in UNUSABLE, which only a maintenance acknowledgement leaves.

use thiserror::Error;

use crate::model::{HealthParams, HealthRecord, HealthState};

/// Outcome of one cycle for one sensor: did it survive both input stages?
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Good,
    Bad,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HealthError {
    /// UNUSABLE records accept no further verdicts.
    #[error("health record is frozen in UNUSABLE")]
    FrozenRecord,
    /// Maintenance acknowledgement only applies to UNUSABLE records.
    #[error("health record is not UNUSABLE")]
    NotUnusable,
}

/// Feeds one cycle verdict into a sensor's health record.
///
/// A sensor that has never responded accrues no bad episodes: power-up
/// silence may degrade it to BAD but never towards UNUSABLE.
pub fn record_cycle_verdict(
    record: &mut HealthRecord,
    verdict: Verdict,
    params: &HealthParams,
    cycle: u64,
) -> Result<(), HealthError> {
    if record.state == HealthState::Unusable {
        return Err(HealthError::FrozenRecord);
    }
    match verdict {
        Verdict::Good => {
            record.consecutive_good += 1;
            record.consecutive_bad = 0;
            if record.state == HealthState::Bad && record.consecutive_good >= params.rehab_threshold
            {
                record.state = HealthState::Good;
                record.consecutive_good = 0;
                record.consecutive_bad = 0;
                record.last_transition_cycle = cycle;
            }
        }
        Verdict::Bad => {
            record.consecutive_bad += 1;
            record.consecutive_good = 0;
            if record.state == HealthState::Good && record.consecutive_bad >= params.bad_threshold {
                if record.ever_responded {
                    record.bad_episodes += 1;
                }
                record.state = if record.ever_responded
                    && record.bad_episodes >= params.unusable_threshold
                {
                    HealthState::Unusable
                } else {
                    HealthState::Bad
                };
                record.consecutive_good = 0;
                record.consecutive_bad = 0;
                record.last_transition_cycle = cycle;
            }
        }
    }
    Ok(())
}

/// Maintenance acknowledgement: returns an UNUSABLE sensor to service with
/// all counters cleared.
pub fn acknowledge_maintenance(record: &mut HealthRecord) -> Result<(), HealthError> {
    if record.state != HealthState::Unusable {
        return Err(HealthError::NotUnusable);
    }
    record.state = HealthState::Good;
    record.consecutive_good = 0;
    record.consecutive_bad = 0;
    record.bad_episodes = 0;
    Ok(())
}
