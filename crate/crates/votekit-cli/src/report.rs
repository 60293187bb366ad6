//! Aggregated view over a trace: outcome histogram, per-sensor rejection
//! counts, health timelines and maintenance flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use votekit_core::model::{HealthState, OutcomeStatus, RejectReason, SensorId};

use crate::trace::TraceRecord;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SensorReport {
    pub rejections: BTreeMap<RejectReason, u64>,
    /// (cycle, from, to) in trace order.
    pub transitions: Vec<(u64, HealthState, HealthState)>,
    pub contributed_cycles: u64,
}

impl SensorReport {
    pub fn final_state(&self) -> HealthState {
        self.transitions
            .last()
            .map(|&(_, _, to)| to)
            .unwrap_or(HealthState::Good)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub profile_id: u16,
    pub cycles: u64,
    pub statuses: BTreeMap<OutcomeStatus, u64>,
    pub sensors: BTreeMap<SensorId, SensorReport>,
}

impl Report {
    /// Sensors whose health timeline ends in UNUSABLE.
    pub fn maintenance_required(&self) -> Vec<SensorId> {
        self.sensors
            .iter()
            .filter(|(_, s)| s.final_state() == HealthState::Unusable)
            .map(|(&id, _)| id)
            .collect()
    }
}

pub fn build_report(records: &[TraceRecord]) -> Report {
    let profile_id = records.first().map(|r| r.profile_id).unwrap_or(0);
    let mut statuses: BTreeMap<OutcomeStatus, u64> = BTreeMap::new();
    let mut sensors: BTreeMap<SensorId, SensorReport> = BTreeMap::new();

    for record in records {
        *statuses.entry(record.status).or_default() += 1;
        for id in &record.contributors {
            sensors.entry(*id).or_default().contributed_cycles += 1;
        }
        for rejection in &record.rejections {
            *sensors
                .entry(rejection.sensor)
                .or_default()
                .rejections
                .entry(rejection.reason)
                .or_default() += 1;
        }
        for transition in &record.health_transitions {
            sensors.entry(transition.sensor).or_default().transitions.push((
                record.cycle,
                transition.from,
                transition.to,
            ));
        }
    }

    Report {
        profile_id,
        cycles: records.len() as u64,
        statuses,
        sensors,
    }
}

/// Human-readable report text; one histogram line, then one block per
/// sensor, then maintenance flags.
pub fn render_report(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "profile {}: {} cycles", report.profile_id, report.cycles);
    let histogram = OutcomeStatus::ALL
        .iter()
        .map(|s| format!("{}: {}", s, report.statuses.get(s).copied().unwrap_or(0)))
        .collect::<Vec<_>>()
        .join(", ");
    let _ = writeln!(out, "outcomes: {histogram}");

    for (id, sensor) in &report.sensors {
        let _ = writeln!(
            out,
            "sensor {}: contributed {} cycles, final health {}",
            id,
            sensor.contributed_cycles,
            sensor.final_state()
        );
        if !sensor.rejections.is_empty() {
            let parts = sensor
                .rejections
                .iter()
                .map(|(reason, count)| format!("{reason}: {count}"))
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(out, "  rejections: {parts}");
        }
        for (cycle, from, to) in &sensor.transitions {
            let _ = writeln!(out, "  cycle {cycle}: {from} -> {to}");
        }
    }

    let needing = report.maintenance_required();
    if needing.is_empty() {
        let _ = writeln!(out, "maintenance required: none");
    } else {
        let names = needing
            .iter()
            .map(|id| id.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(out, "maintenance required: sensors {names}");
    }
    out
}
