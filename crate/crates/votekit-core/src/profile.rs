//! Runtime state of an instantiated vote profile, including the indexed
//! object dictionary used for live inspection and re-parameterization.
//!
//! Writes never touch the active configuration directly: they accumulate in
//! a staged copy (validated on every write) and latch at the next cycle
//! boundary, so a cycle always runs under one consistent configuration.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::config::validate_profile;
use crate::model::{
    AlgorithmKind, HealthRecord, HealthState, OutcomeStatus, SensorId, VoteOutcome,
    VoteProfileConfig,
};

/// Profile identity and capability limits.
pub const OBJ_PROFILE_ID: u16 = 0x1000;
pub const OBJ_MAX_DEVICES: u16 = 0x1001;
/// Algorithm parameters (writable, latched at cycle boundaries).
pub const OBJ_ALGORITHM_KIND: u16 = 0x2000;
pub const OBJ_ALGORITHM_M: u16 = 0x2001;
pub const OBJ_ALGORITHM_N: u16 = 0x2002;
pub const OBJ_ALGORITHM_EPSILON: u16 = 0x2003;
/// Weight of the k-th configured sensor lives at base + k.
pub const OBJ_SENSOR_WEIGHT_BASE: u16 = 0x2100;
/// Live outputs (read-only).
pub const OBJ_OUTPUT_VALUE: u16 = 0x3000;
pub const OBJ_OUTCOME_STATUS: u16 = 0x3001;
/// Health thresholds (writable, latched at cycle boundaries).
pub const OBJ_BAD_THRESHOLD: u16 = 0x4000;
pub const OBJ_REHAB_THRESHOLD: u16 = 0x4001;
pub const OBJ_UNUSABLE_THRESHOLD: u16 = 0x4002;

/// Value transported through the object dictionary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectValue {
    Unsigned(u64),
    Float(f64),
    Kind(AlgorithmKind),
    Status(OutcomeStatus),
    /// Read of an output that has not been produced yet.
    Absent,
}

#[derive(Debug, Error, PartialEq)]
pub enum ObjectError {
    #[error("no object at index {0:#06x}")]
    UnknownIndex(u16),
    #[error("object {0:#06x} is read-only")]
    ReadOnly(u16),
    #[error("write rejected: {0}")]
    Constraint(String),
}

/// Per-sensor bookkeeping that survives across cycles.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SensorRuntime {
    /// Highest accepted sequence number; 0 means none yet (polls start at 1).
    pub last_seq: u32,
    /// Consecutive cycles without an in-window response.
    pub missed_cycles: u32,
    /// Last value that passed plausibility, with its cycle.
    pub last_plausible: Option<PlausiblePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlausiblePoint {
    pub cycle: u64,
    pub value: f64,
}

/// One instantiated vote profile: active configuration, staged writes and
/// all per-sensor state.
#[derive(Debug, Clone)]
pub struct VoteProfile {
    pub(crate) active: VoteProfileConfig,
    pub(crate) staged: VoteProfileConfig,
    pub(crate) health: BTreeMap<SensorId, HealthRecord>,
    pub(crate) runtime: BTreeMap<SensorId, SensorRuntime>,
    pub(crate) output_value: Option<f64>,
    pub(crate) last_outcome: Option<VoteOutcome>,
}

impl VoteProfile {
    pub fn new(config: VoteProfileConfig) -> Self {
        let health = config
            .sensors
            .iter()
            .map(|s| (s.id, HealthRecord::new()))
            .collect();
        let runtime = config
            .sensors
            .iter()
            .map(|s| (s.id, SensorRuntime::default()))
            .collect();
        VoteProfile {
            staged: config.clone(),
            active: config,
            health,
            runtime,
            output_value: None,
            last_outcome: None,
        }
    }

    /// The configuration cycles currently run under.
    pub fn config(&self) -> &VoteProfileConfig {
        &self.active
    }

    pub fn output_value(&self) -> Option<f64> {
        self.output_value
    }

    pub fn last_outcome(&self) -> Option<&VoteOutcome> {
        self.last_outcome.as_ref()
    }

    pub fn health(&self, id: SensorId) -> Option<&HealthRecord> {
        self.health.get(&id)
    }

    pub fn health_records(&self) -> &BTreeMap<SensorId, HealthRecord> {
        &self.health
    }

    /// Returns an UNUSABLE sensor to service (maintenance acknowledgement).
    pub fn acknowledge_maintenance(
        &mut self,
        id: SensorId,
    ) -> Result<(), crate::health::HealthError> {
        let record = self
            .health
            .get_mut(&id)
            .ok_or(crate::health::HealthError::NotUnusable)?;
        crate::health::acknowledge_maintenance(record)
    }

    /// True when staged writes have not latched yet.
    pub fn has_pending_writes(&self) -> bool {
        self.staged != self.active
    }

    /// Latches staged writes; the pipeline calls this at every cycle start.
    pub fn apply_pending_writes(&mut self) {
        if self.has_pending_writes() {
            self.active = self.staged.clone();
        }
    }

    /// Reads one dictionary object. Reads always reflect the active
    /// configuration, never staged writes.
    pub fn object_read(&self, index: u16) -> Result<ObjectValue, ObjectError> {
        let cfg = &self.active;
        let value = match index {
            OBJ_PROFILE_ID => ObjectValue::Unsigned(cfg.id as u64),
            OBJ_MAX_DEVICES => ObjectValue::Unsigned(cfg.max_devices as u64),
            OBJ_ALGORITHM_KIND => ObjectValue::Kind(cfg.algorithm.kind),
            OBJ_ALGORITHM_M => ObjectValue::Unsigned(cfg.algorithm.m as u64),
            OBJ_ALGORITHM_N => ObjectValue::Unsigned(cfg.algorithm.n as u64),
            OBJ_ALGORITHM_EPSILON => ObjectValue::Float(cfg.algorithm.epsilon),
            OBJ_OUTPUT_VALUE => match self.output_value {
                Some(v) => ObjectValue::Float(v),
                None => ObjectValue::Absent,
            },
            OBJ_OUTCOME_STATUS => match &self.last_outcome {
                Some(o) => ObjectValue::Status(o.status),
                None => ObjectValue::Absent,
            },
            OBJ_BAD_THRESHOLD => ObjectValue::Unsigned(cfg.health.bad_threshold as u64),
            OBJ_REHAB_THRESHOLD => ObjectValue::Unsigned(cfg.health.rehab_threshold as u64),
            OBJ_UNUSABLE_THRESHOLD => ObjectValue::Unsigned(cfg.health.unusable_threshold as u64),
            _ => match self.weight_slot(index) {
                Some(k) => ObjectValue::Float(cfg.sensors[k].weight),
                None => return Err(ObjectError::UnknownIndex(index)),
            },
        };
        Ok(value)
    }

    /// Stages one dictionary write. The write is validated against the full
    /// staged configuration immediately but only takes effect at the next
    /// cycle boundary.
    pub fn object_write(&mut self, index: u16, value: ObjectValue) -> Result<(), ObjectError> {
        let mut candidate = self.staged.clone();
        match index {
            OBJ_PROFILE_ID | OBJ_MAX_DEVICES | OBJ_OUTPUT_VALUE | OBJ_OUTCOME_STATUS => {
                return Err(ObjectError::ReadOnly(index));
            }
            OBJ_ALGORITHM_KIND => candidate.algorithm.kind = expect_kind(index, value)?,
            OBJ_ALGORITHM_M => candidate.algorithm.m = expect_u32(index, value)?,
            OBJ_ALGORITHM_N => candidate.algorithm.n = expect_u32(index, value)?,
            OBJ_ALGORITHM_EPSILON => candidate.algorithm.epsilon = expect_float(index, value)?,
            OBJ_BAD_THRESHOLD => candidate.health.bad_threshold = expect_u32(index, value)?,
            OBJ_REHAB_THRESHOLD => candidate.health.rehab_threshold = expect_u32(index, value)?,
            OBJ_UNUSABLE_THRESHOLD => {
                candidate.health.unusable_threshold = expect_u32(index, value)?
            }
            _ => match self.weight_slot(index) {
                Some(k) => candidate.sensors[k].weight = expect_float(index, value)?,
                None => return Err(ObjectError::UnknownIndex(index)),
            },
        }
        let findings = validate_profile(&candidate);
        if let Some(first) = findings.first() {
            return Err(ObjectError::Constraint(first.to_string()));
        }
        self.staged = candidate;
        Ok(())
    }

    /// Maps a weight object index to a sensor position, if in range.
    fn weight_slot(&self, index: u16) -> Option<usize> {
        let k = index.checked_sub(OBJ_SENSOR_WEIGHT_BASE)? as usize;
        (k < self.active.sensors.len()).then_some(k)
    }
}

fn expect_u32(index: u16, value: ObjectValue) -> Result<u32, ObjectError> {
    match value {
        ObjectValue::Unsigned(v) if v <= u32::MAX as u64 => Ok(v as u32),
        other => Err(ObjectError::Constraint(format!(
            "object {index:#06x} expects an unsigned integer, got {other:?}"
        ))),
    }
}

fn expect_float(index: u16, value: ObjectValue) -> Result<f64, ObjectError> {
    match value {
        ObjectValue::Float(v) => Ok(v),
        ObjectValue::Unsigned(v) => Ok(v as f64),
        other => Err(ObjectError::Constraint(format!(
            "object {index:#06x} expects a number, got {other:?}"
        ))),
    }
}

fn expect_kind(index: u16, value: ObjectValue) -> Result<AlgorithmKind, ObjectError> {
    match value {
        ObjectValue::Kind(k) => Ok(k),
        other => Err(ObjectError::Constraint(format!(
            "object {index:#06x} expects an algorithm kind, got {other:?}"
        ))),
    }
}

/// Instantiates runtime profiles from validated configurations.
pub fn instantiate_profiles(configs: &[VoteProfileConfig]) -> Vec<VoteProfile> {
    configs.iter().cloned().map(VoteProfile::new).collect()
}

/// Current health state of every configured sensor.
pub fn health_snapshot(profile: &VoteProfile) -> BTreeMap<SensorId, HealthState> {
    profile
        .health
        .iter()
        .map(|(&id, rec)| (id, rec.state))
        .collect()
}
