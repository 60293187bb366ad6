//! Fault injection schedules for emulated sensors.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FaultKind {
    #[default]
    None,
    /// No responses at all.
    Silent,
    /// Repeats the value from the fault's start cycle.
    Stuck,
    /// Adds `magnitude` to every value.
    Offset,
    /// Adds `magnitude` for the start cycle only.
    Spike,
    /// Delays responses by `magnitude` microseconds.
    Delay,
    /// Sends `magnitude` copies of the response per poll.
    Babble,
    /// Echoes the previous poll's sequence number.
    DuplicateSeq,
}

/// One fault active over a cycle range; an omitted end leaves it open.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FaultSpec {
    pub kind: FaultKind,
    #[serde(default)]
    pub start_cycle: u64,
    #[serde(default)]
    pub end_cycle: Option<u64>,
    /// Offset/spike size, delay in microseconds, or babble frame count.
    #[serde(default)]
    pub magnitude: f64,
}

impl FaultSpec {
    /// Whether the fault shapes behaviour at this cycle. SPIKE is a
    /// single-cycle event regardless of the declared range.
    pub fn active_at(&self, cycle: u64) -> bool {
        match self.kind {
            FaultKind::None => false,
            FaultKind::Spike => cycle == self.start_cycle,
            _ => cycle >= self.start_cycle && cycle <= self.end_cycle.unwrap_or(u64::MAX),
        }
    }

    /// Declared schedule range, used for overlap validation.
    pub fn declared_range(&self) -> (u64, u64) {
        match self.kind {
            FaultKind::Spike => (self.start_cycle, self.start_cycle),
            _ => (self.start_cycle, self.end_cycle.unwrap_or(u64::MAX)),
        }
    }
}
