//! Cycle traces as JSON Lines: one self-contained record per cycle.
//!
//! Records carry only values derived from cycle numbers and frame contents
//! — never wall-clock readings — so two runs of the same scenario produce
//! byte-identical files regardless of clock mode.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use votekit_core::model::{HealthState, OutcomeStatus, RejectReason, SensorId};
use votekit_core::sim::{CycleRecord, ScenarioRun};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceRecord {
    pub cycle: u64,
    pub profile_id: u16,
    pub status: OutcomeStatus,
    /// Voted output; null when the cycle produced none.
    pub value: Option<f64>,
    pub contributors: Vec<SensorId>,
    pub rejections: Vec<TraceRejection>,
    pub health_transitions: Vec<TraceTransition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceRejection {
    pub sensor: SensorId,
    pub reason: RejectReason,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceTransition {
    pub sensor: SensorId,
    pub from: HealthState,
    pub to: HealthState,
}

impl TraceRecord {
    pub fn from_cycle(profile_id: u16, record: &CycleRecord) -> Self {
        TraceRecord {
            cycle: record.cycle,
            profile_id,
            status: record.outcome.status,
            value: record.outcome.value,
            contributors: record.outcome.contributors.clone(),
            rejections: record
                .outcome
                .rejections
                .iter()
                .map(|r| TraceRejection {
                    sensor: r.sensor_id,
                    reason: r.reason,
                    detail: r.detail.clone(),
                })
                .collect(),
            health_transitions: record
                .health_transitions
                .iter()
                .map(|t| TraceTransition {
                    sensor: t.sensor_id,
                    from: t.from,
                    to: t.to,
                })
                .collect(),
        }
    }
}

pub fn trace_records(run: &ScenarioRun) -> Vec<TraceRecord> {
    run.records
        .iter()
        .map(|r| TraceRecord::from_cycle(run.profile_id, r))
        .collect()
}

/// Writes one JSON object per line.
pub fn write_trace<W: Write>(mut writer: W, records: &[TraceRecord]) -> std::io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a JSON Lines trace, failing on the first malformed line.
pub fn read_trace<R: BufRead>(reader: R) -> Result<Vec<TraceRecord>, String> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| format!("line {}: {e}", i + 1))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TraceRecord =
            serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?;
        records.push(record);
    }
    Ok(records)
}
