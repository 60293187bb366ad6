//! votekit-core: a configurable voting framework for N-redundant
//! distributed sensors.
//!
//! A vote profile polls its sensors once per cycle and pushes the responses
//! through four stages: behavioural acceptability (timing, frame counts,
//! sequence progress), value plausibility (range and rate), the configured
//! voting algorithm, and output plausibility. Alongside the vote, every
//! sensor's long-term health is tracked through a GOOD/BAD/UNUSABLE state
//! machine so persistently faulty devices are quarantined until maintained.
//!
//! The `sim` module executes scenario descriptions against emulated
//! sensors, either on a purely logical clock or over real UDP sockets.

pub mod config;
pub mod health;
pub mod model;
pub mod pipeline;
pub mod profile;
pub mod sim;
pub mod voters;

pub use config::{load_config, serialize_config, validate_document, validate_profile, ConfigError};
pub use model::{
    AlgorithmKind, AlgorithmSpec, HealthParams, HealthRecord, HealthState, OutcomeStatus,
    RejectReason, Rejection, SensorDescriptor, SensorId, SensorSample, StagePartition,
    VoteOutcome, VoteProfileConfig,
};
pub use pipeline::{
    input_data, input_vote, output_data, output_vote, voting_manager, CycleContext,
};
pub use profile::{instantiate_profiles, ObjectError, ObjectValue, VoteProfile};
pub use voters::{
    exact_majority, median_vote, moon_bounded_median, weighted_cluster_vote, Ballot, VoterError,
    VoterResult,
};
