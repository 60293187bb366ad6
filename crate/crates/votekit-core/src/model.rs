//! Domain types shared by every stage of the voting framework.
//!
//! Engineering values are `f64` throughout; raw wire values are `i32`
//! sign-extended from the sensor's configured bit width.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of one redundant sensor inside a vote profile.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct SensorId(pub u16);

impl fmt::Display for SensorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Static description of the values a sensor delivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DataCharacteristics {
    /// Raw value width on the wire; one of 8, 16 or 32.
    pub bit_size: u8,
    /// Engineering units per raw count; raw * scale = engineering value.
    pub scale: f64,
    pub unit_label: String,
    pub plausible_min: f64,
    pub plausible_max: f64,
    /// Largest plausible change per cycle, in engineering units.
    pub max_delta_per_cycle: f64,
}

/// One configured sensor: identity, vote weight and data characteristics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SensorDescriptor {
    pub id: SensorId,
    pub name: String,
    /// Relative vote weight; sensors closer to the measurand get more.
    #[serde(default = "default_weight")]
    pub weight: f64,
    #[serde(flatten)]
    pub characteristics: DataCharacteristics,
}

fn default_weight() -> f64 {
    1.0
}

/// Behavioural acceptability limits applied before any value checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AcceptabilityParams {
    /// Window after cycle start within which a response counts as on time.
    pub response_timeout_micros: u64,
    /// More frames than this in one cycle is babbling.
    pub max_frames_per_cycle: u32,
    /// Consecutive missed cycles at which TIMEOUT escalates to STALE.
    pub stale_limit: u32,
}

/// Thresholds of the per-sensor health state machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HealthParams {
    /// Consecutive bad cycles before GOOD degrades to BAD.
    pub bad_threshold: u32,
    /// Consecutive good cycles before BAD recovers to GOOD.
    pub rehab_threshold: u32,
    /// Bad episodes at which a degradation lands in UNUSABLE instead.
    pub unusable_threshold: u32,
}

/// Selects the voting algorithm used at the output-vote stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AlgorithmKind {
    Median,
    MoonBoundedMedian,
    WeightedCluster,
    ExactMajority,
}

impl AlgorithmKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlgorithmKind::Median => "MEDIAN",
            AlgorithmKind::MoonBoundedMedian => "MOON_BOUNDED_MEDIAN",
            AlgorithmKind::WeightedCluster => "WEIGHTED_CLUSTER",
            AlgorithmKind::ExactMajority => "EXACT_MAJORITY",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Voting algorithm selection plus its m-out-of-n and agreement parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AlgorithmSpec {
    pub kind: AlgorithmKind,
    /// Minimum sensors that must agree (the m in m-out-of-n).
    pub m: u32,
    /// Expected sensor count (the n in m-out-of-n).
    pub n: u32,
    /// Agreement band: two values agree when they differ by at most epsilon.
    pub epsilon: f64,
}

/// Plausibility bounds applied to the voted output value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OutputRange {
    pub plausible_min: f64,
    pub plausible_max: f64,
}

/// Complete static configuration of one vote profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VoteProfileConfig {
    pub id: u16,
    pub max_devices: u32,
    pub cycle_time_micros: u64,
    /// Offset into the cycle at which voting runs; responses arriving later
    /// belong to the next cycle.
    pub voting_offset_micros: u64,
    pub algorithm: AlgorithmSpec,
    pub acceptability: AcceptabilityParams,
    pub health: HealthParams,
    pub output: OutputRange,
    pub sensors: Vec<SensorDescriptor>,
}

impl VoteProfileConfig {
    pub fn sensor(&self, id: SensorId) -> Option<&SensorDescriptor> {
        self.sensors.iter().find(|s| s.id == id)
    }
}

/// One decoded, timestamped response frame from a sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SensorSample {
    pub sensor_id: SensorId,
    /// Sequence number echoed from the poll.
    pub seq: u32,
    /// Receive time in microseconds since scenario start.
    pub receive_time_micros: u64,
    pub raw_value: i32,
    /// raw_value * scale, in engineering units.
    pub eng_value: f64,
    /// Total frames this sensor delivered in the same cycle.
    pub frame_count_this_cycle: u32,
}

/// Why a sensor was excluded from the vote in one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RejectReason {
    Timeout,
    Stale,
    Babble,
    BadSequence,
    OutOfRange,
    RateExceeded,
    NoCluster,
    UnusableSensor,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::Timeout => "TIMEOUT",
            RejectReason::Stale => "STALE",
            RejectReason::Babble => "BABBLE",
            RejectReason::BadSequence => "BAD_SEQUENCE",
            RejectReason::OutOfRange => "OUT_OF_RANGE",
            RejectReason::RateExceeded => "RATE_EXCEEDED",
            RejectReason::NoCluster => "NO_CLUSTER",
            RejectReason::UnusableSensor => "UNUSABLE_SENSOR",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A sensor's exclusion from one cycle, with a human-readable detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Rejection {
    pub sensor_id: SensorId,
    pub reason: RejectReason,
    pub cycle: u64,
    pub detail: String,
}

/// Result of an acceptability or plausibility stage: surviving samples plus
/// the rejections accumulated so far.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StagePartition {
    pub good: Vec<SensorSample>,
    pub bad: Vec<Rejection>,
}

/// Overall verdict of one voting cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OutcomeStatus {
    /// Every configured sensor contributed and the vote succeeded.
    Valid,
    /// The vote succeeded with at least one sensor excluded.
    Degraded,
    /// Enough sensors responded but no agreeing cluster formed.
    NoConsensus,
    /// Fewer good samples than the required m.
    InsufficientSensors,
    /// The voted value fell outside the output plausibility range.
    ImplausibleOutput,
}

impl OutcomeStatus {
    pub const ALL: [OutcomeStatus; 5] = [
        OutcomeStatus::Valid,
        OutcomeStatus::Degraded,
        OutcomeStatus::NoConsensus,
        OutcomeStatus::InsufficientSensors,
        OutcomeStatus::ImplausibleOutput,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            OutcomeStatus::Valid => "VALID",
            OutcomeStatus::Degraded => "DEGRADED",
            OutcomeStatus::NoConsensus => "NO_CONSENSUS",
            OutcomeStatus::InsufficientSensors => "INSUFFICIENT_SENSORS",
            OutcomeStatus::ImplausibleOutput => "IMPLAUSIBLE_OUTPUT",
        }
    }
}

impl fmt::Display for OutcomeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full result of one voting cycle.
///
/// Invariant: `value` is present iff status is VALID or DEGRADED, and then
/// `contributors` is non-empty and sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteOutcome {
    pub status: OutcomeStatus,
    pub value: Option<f64>,
    pub contributors: Vec<SensorId>,
    pub rejections: Vec<Rejection>,
    pub cycle: u64,
}

/// Health classification of one sensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HealthState {
    Good,
    Bad,
    Unusable,
}

impl HealthState {
    pub fn as_str(&self) -> &'static str {
        match self {
            HealthState::Good => "GOOD",
            HealthState::Bad => "BAD",
            HealthState::Unusable => "UNUSABLE",
        }
    }
}

impl fmt::Display for HealthState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-sensor health bookkeeping.
///
/// Invariant: at most one of `consecutive_good` / `consecutive_bad` is
/// non-zero. `bad_episodes` counts GOOD-to-BAD transitions and is never reset
/// by rehabilitation, only by maintenance acknowledgement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HealthRecord {
    pub state: HealthState,
    pub consecutive_good: u32,
    pub consecutive_bad: u32,
    pub bad_episodes: u32,
    pub last_transition_cycle: u64,
    /// False until the sensor's first frame ever arrives; sensors that have
    /// never responded do not accrue bad episodes (late power-up grace).
    pub ever_responded: bool,
}

impl HealthRecord {
    pub fn new() -> Self {
        HealthRecord {
            state: HealthState::Good,
            consecutive_good: 0,
            consecutive_bad: 0,
            bad_episodes: 0,
            last_transition_cycle: 0,
            ever_responded: false,
        }
    }

    /// Notes that at least one frame from this sensor has ever arrived.
    pub fn mark_contact(&mut self) {
        self.ever_responded = true;
    }
}

impl Default for HealthRecord {
    fn default() -> Self {
        Self::new()
    }
}
