//! Loading, validation and serialization of vote profile configurations.
//!
//! A configuration document holds one or more `[[profile]]` tables. Loading
//! first decodes the document (schema errors) and then checks every profile
//! against the cross-field constraints, collecting all findings instead of
//! stopping at the first.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::VoteProfileConfig;

/// One constraint violation, pointing at the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    /// Profile id when known; None for document-level findings.
    pub profile_id: Option<u16>,
    /// Field path using document key names, e.g. `sensors[1].plausibleMin`.
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.profile_id {
            Some(id) => write!(f, "profile {}: {}: {}", id, self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    /// The document does not decode into the configuration schema.
    #[error("schema error: {0}")]
    Schema(String),
    /// The document decodes but violates constraints.
    #[error("{} constraint violation(s)", .0.len())]
    Constraints(Vec<Finding>),
}

#[derive(Debug, Serialize, Deserialize)]
struct ConfigDocument {
    profile: Vec<VoteProfileConfig>,
}

/// Parses and validates a configuration document.
pub fn load_config(document: &str) -> Result<Vec<VoteProfileConfig>, ConfigError> {
    let doc: ConfigDocument =
        toml::from_str(document).map_err(|e| ConfigError::Schema(e.to_string()))?;
    let findings = validate_document(&doc.profile);
    if findings.is_empty() {
        Ok(doc.profile)
    } else {
        Err(ConfigError::Constraints(findings))
    }
}

/// Serializes profiles back into a document that `load_config` accepts.
pub fn serialize_config(profiles: &[VoteProfileConfig]) -> Result<String, ConfigError> {
    let doc = ConfigDocument {
        profile: profiles.to_vec(),
    };
    toml::to_string_pretty(&doc).map_err(|e| ConfigError::Schema(e.to_string()))
}

/// Validates a set of profiles, returning every finding.
pub fn validate_document(profiles: &[VoteProfileConfig]) -> Vec<Finding> {
    let mut findings = Vec::new();
    if profiles.is_empty() {
        findings.push(Finding {
            profile_id: None,
            field: "profile".to_string(),
            message: "document defines no profiles".to_string(),
        });
    }
    for (i, profile) in profiles.iter().enumerate() {
        if profiles[..i].iter().any(|p| p.id == profile.id) {
            findings.push(Finding {
                profile_id: Some(profile.id),
                field: "id".to_string(),
                message: "duplicate profile id".to_string(),
            });
        }
        findings.extend(validate_profile(profile));
    }
    findings
}

/// Validates one profile against all cross-field constraints.
pub fn validate_profile(p: &VoteProfileConfig) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut push = |field: &str, message: String| {
        out.push(Finding {
            profile_id: Some(p.id),
            field: field.to_string(),
            message,
        })
    };

    if p.max_devices == 0 {
        push("maxDevices", "must be at least 1".to_string());
    }
    if p.cycle_time_micros == 0 {
        push("cycleTimeMicros", "must be positive".to_string());
    }
    if p.voting_offset_micros >= p.cycle_time_micros {
        push(
            "votingOffsetMicros",
            format!(
                "must be less than cycleTimeMicros ({} >= {})",
                p.voting_offset_micros, p.cycle_time_micros
            ),
        );
    }

    if p.sensors.is_empty() {
        push("sensors", "profile configures no sensors".to_string());
    }
    if p.sensors.len() as u64 > p.max_devices as u64 {
        push(
            "sensors",
            format!(
                "{} sensors exceed maxDevices {}",
                p.sensors.len(),
                p.max_devices
            ),
        );
    }

    let a = &p.algorithm;
    if a.m == 0 {
        push("algorithm.m", "must be at least 1".to_string());
    } else if a.m > a.n {
        push("algorithm.m", format!("m {} exceeds n {}", a.m, a.n));
    }
    if a.n as usize > p.sensors.len() {
        push(
            "algorithm.n",
            format!("n {} exceeds configured sensor count {}", a.n, p.sensors.len()),
        );
    }
    if !(a.epsilon >= 0.0) || !a.epsilon.is_finite() {
        push(
            "algorithm.epsilon",
            format!("must be finite and non-negative, got {}", a.epsilon),
        );
    }

    let acc = &p.acceptability;
    if acc.response_timeout_micros >= p.cycle_time_micros {
        push(
            "acceptability.responseTimeoutMicros",
            format!(
                "must be less than cycleTimeMicros ({} >= {})",
                acc.response_timeout_micros, p.cycle_time_micros
            ),
        );
    }
    if acc.max_frames_per_cycle == 0 {
        push(
            "acceptability.maxFramesPerCycle",
            "must be at least 1".to_string(),
        );
    }
    if acc.stale_limit == 0 {
        push("acceptability.staleLimit", "must be at least 1".to_string());
    }

    let h = &p.health;
    if h.bad_threshold == 0 {
        push("health.badThreshold", "must be at least 1".to_string());
    }
    if h.rehab_threshold == 0 {
        push("health.rehabThreshold", "must be at least 1".to_string());
    }
    if h.unusable_threshold == 0 {
        push("health.unusableThreshold", "must be at least 1".to_string());
    }

    if !(p.output.plausible_min < p.output.plausible_max) {
        push(
            "output.plausibleMin",
            format!(
                "plausibleMin {} must be below plausibleMax {}",
                p.output.plausible_min, p.output.plausible_max
            ),
        );
    }

    let mut any_positive_weight = false;
    for (k, s) in p.sensors.iter().enumerate() {
        let sensor_field = |name: &str| format!("sensors[{k}].{name}");
        if p.sensors[..k].iter().any(|other| other.id == s.id) {
            push(&sensor_field("id"), format!("duplicate sensor id {}", s.id));
        }
        if !matches!(s.characteristics.bit_size, 8 | 16 | 32) {
            push(
                &sensor_field("bitSize"),
                format!("must be 8, 16 or 32, got {}", s.characteristics.bit_size),
            );
        }
        if !s.characteristics.scale.is_finite() || s.characteristics.scale == 0.0 {
            push(
                &sensor_field("scale"),
                format!("must be finite and non-zero, got {}", s.characteristics.scale),
            );
        }
        if !(s.weight >= 0.0) || !s.weight.is_finite() {
            push(
                &sensor_field("weight"),
                format!("must be finite and non-negative, got {}", s.weight),
            );
        }
        if s.weight > 0.0 {
            any_positive_weight = true;
        }
        if !(s.characteristics.plausible_min < s.characteristics.plausible_max) {
            push(
                &sensor_field("plausibleMin"),
                format!(
                    "plausibleMin {} must be below plausibleMax {}",
                    s.characteristics.plausible_min, s.characteristics.plausible_max
                ),
            );
        }
        if !(s.characteristics.max_delta_per_cycle >= 0.0)
            || !s.characteristics.max_delta_per_cycle.is_finite()
        {
            push(
                &sensor_field("maxDeltaPerCycle"),
                format!(
                    "must be finite and non-negative, got {}",
                    s.characteristics.max_delta_per_cycle
                ),
            );
        }
        if k > 0 && s.characteristics.unit_label != p.sensors[0].characteristics.unit_label {
            push(
                &sensor_field("unitLabel"),
                format!(
                    "unit {:?} differs from sensor 0 unit {:?}; redundant sensors must share units",
                    s.characteristics.unit_label, p.sensors[0].characteristics.unit_label
                ),
            );
        }
    }
    if !p.sensors.is_empty() && !any_positive_weight {
        push("sensors", "at least one sensor needs a positive weight".to_string());
    }

    out
}
