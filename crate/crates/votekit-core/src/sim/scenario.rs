//! Scenario documents: which sensors exist, what they emit and when they
//! power up, plus clock mode and seeding.

use serde::{Deserialize, Serialize};

use crate::model::{SensorId, VoteProfileConfig};
use crate::sim::fault::FaultSpec;
use crate::sim::waveform::{derive_sensor_seed, WaveformSpec};
use crate::sim::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClockMode {
    /// Logical clock, single-threaded, no wall time: bit-reproducible.
    #[default]
    Virtual,
    /// Wall clock with real UDP endpoints on the loopback interface.
    Real,
}

/// Scenario document as written in a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScenarioFile {
    pub profile_id: u16,
    /// Configuration document to load the profile from; a runner may
    /// override this.
    #[serde(default)]
    pub config_path: Option<String>,
    pub total_cycles: u64,
    #[serde(default)]
    pub clock_mode: ClockMode,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(rename = "sensor")]
    pub sensors: Vec<ScenarioSensor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScenarioSensor {
    pub id: SensorId,
    /// First cycle at which the device is powered.
    #[serde(default)]
    pub start_cycle: u64,
    pub waveform: WaveformSpec,
    /// Pins the noise seed; otherwise derived from the master seed.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, rename = "fault")]
    pub faults: Vec<FaultSpec>,
}

/// A scenario bound to its profile, with all seeds resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub profile: VoteProfileConfig,
    pub total_cycles: u64,
    pub clock_mode: ClockMode,
    pub master_seed: u64,
    pub sensors: Vec<ResolvedSensor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSensor {
    pub id: SensorId,
    pub start_cycle: u64,
    pub waveform: WaveformSpec,
    pub faults: Vec<FaultSpec>,
}

/// Parses a scenario document.
pub fn parse_scenario(document: &str) -> Result<ScenarioFile, SimError> {
    toml::from_str(document).map_err(|e| SimError::BadScenario(e.to_string()))
}

/// Serializes a scenario document that `parse_scenario` accepts.
pub fn serialize_scenario(file: &ScenarioFile) -> Result<String, SimError> {
    toml::to_string_pretty(file).map_err(|e| SimError::BadScenario(e.to_string()))
}

/// Binds a scenario to a profile configuration and resolves seeds.
///
/// `seed_override` replaces the document's master seed; `clock_override`
/// replaces its clock mode. Every configured sensor must be described by
/// exactly one scenario entry and fault schedules must not overlap.
pub fn resolve_scenario(
    file: &ScenarioFile,
    profile: &VoteProfileConfig,
    seed_override: Option<u64>,
    clock_override: Option<ClockMode>,
) -> Result<ScenarioSpec, SimError> {
    if file.profile_id != profile.id {
        return Err(SimError::ConfigMismatch(format!(
            "scenario targets profile {} but the configuration defines profile {}",
            file.profile_id, profile.id
        )));
    }
    if file.total_cycles == 0 {
        return Err(SimError::BadScenario(
            "totalCycles must be at least 1".to_string(),
        ));
    }
    // Poll sequence numbers are cycle + 1 in 32 bits.
    if file.total_cycles >= u32::MAX as u64 {
        return Err(SimError::BadScenario(format!(
            "totalCycles {} exceeds the 32-bit poll sequence space",
            file.total_cycles
        )));
    }

    let master_seed = seed_override.unwrap_or(file.master_seed);
    let mut sensors = Vec::new();
    for descriptor in &profile.sensors {
        let matches: Vec<&ScenarioSensor> =
            file.sensors.iter().filter(|s| s.id == descriptor.id).collect();
        let entry = match matches.as_slice() {
            [one] => *one,
            [] => {
                return Err(SimError::ConfigMismatch(format!(
                    "scenario does not describe configured sensor {}",
                    descriptor.id
                )))
            }
            _ => {
                return Err(SimError::ConfigMismatch(format!(
                    "scenario describes sensor {} more than once",
                    descriptor.id
                )))
            }
        };

        let ranges: Vec<(u64, u64)> = entry.faults.iter().map(|f| f.declared_range()).collect();
        for (i, a) in ranges.iter().enumerate() {
            for b in &ranges[..i] {
                if a.0 <= b.1 && b.0 <= a.1 {
                    return Err(SimError::BadScenario(format!(
                        "sensor {} has overlapping fault schedules [{}, {}] and [{}, {}]",
                        descriptor.id, b.0, b.1, a.0, a.1
                    )));
                }
            }
        }

        let mut waveform = entry.waveform.clone();
        waveform.seed = entry
            .seed
            .unwrap_or_else(|| derive_sensor_seed(master_seed, descriptor.id.0));
        sensors.push(ResolvedSensor {
            id: descriptor.id,
            start_cycle: entry.start_cycle,
            waveform,
            faults: entry.faults.clone(),
        });
    }

    for extra in &file.sensors {
        if profile.sensor(extra.id).is_none() {
            return Err(SimError::ConfigMismatch(format!(
                "scenario describes sensor {} which the profile does not configure",
                extra.id
            )));
        }
    }

    Ok(ScenarioSpec {
        profile: profile.clone(),
        total_cycles: file.total_cycles,
        clock_mode: clock_override.unwrap_or(file.clock_mode),
        master_seed,
        sensors,
    })
}

/// Convenience used by tests: a flat-signal scenario for a profile.
pub fn constant_scenario(profile: &VoteProfileConfig, total_cycles: u64, level: f64) -> ScenarioFile {
    ScenarioFile {
        profile_id: profile.id,
        config_path: None,
        total_cycles,
        clock_mode: ClockMode::Virtual,
        master_seed: 0,
        sensors: profile
            .sensors
            .iter()
            .map(|s| ScenarioSensor {
                id: s.id,
                start_cycle: 0,
                waveform: WaveformSpec::constant(level),
                seed: None,
                faults: Vec::new(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::tests::valid_profile;
    use crate::sim::fault::FaultKind;
    use crate::sim::waveform::WaveformKind;

    #[test]
    fn minimal_document_parses_with_defaults() {
        let text = r#"
profileId = 1
totalCycles = 50

[[sensor]]
id = 1
[sensor.waveform]
kind = "CONSTANT"
offset = 20.0

[[sensor]]
id = 2
[sensor.waveform]
kind = "NOISY_CONSTANT"
offset = 20.0
noiseRange = 0.25

[[sensor]]
id = 3
startCycle = 10
[sensor.waveform]
kind = "SINE"
offset = 20.0
amplitude = 1.0
period = 40.0

[[sensor.fault]]
kind = "SILENT"
startCycle = 30
endCycle = 35
"#;
        let file = parse_scenario(text).unwrap();
        assert_eq!(file.clock_mode, ClockMode::Virtual);
        assert_eq!(file.master_seed, 0);
        assert_eq!(file.sensors.len(), 3);
        assert_eq!(file.sensors[2].start_cycle, 10);
        assert_eq!(file.sensors[2].faults[0].kind, FaultKind::Silent);
        assert_eq!(file.sensors[2].faults[0].end_cycle, Some(35));
        assert_eq!(file.sensors[0].waveform.kind, WaveformKind::Constant);

        let spec = resolve_scenario(&file, &valid_profile(), None, None).unwrap();
        assert_eq!(spec.total_cycles, 50);
        assert_eq!(spec.sensors.len(), 3);
    }

    #[test]
    fn seeds_derive_from_master_unless_pinned() {
        let profile = valid_profile();
        let mut file = constant_scenario(&profile, 10, 20.0);
        file.master_seed = 99;
        file.sensors[1].seed = Some(1234);
        let spec = resolve_scenario(&file, &profile, None, None).unwrap();
        assert_eq!(spec.sensors[0].waveform.seed, derive_sensor_seed(99, 1));
        assert_eq!(spec.sensors[1].waveform.seed, 1234);
        assert_eq!(spec.sensors[2].waveform.seed, derive_sensor_seed(99, 3));

        let spec = resolve_scenario(&file, &profile, Some(7), None).unwrap();
        assert_eq!(spec.master_seed, 7);
        assert_eq!(spec.sensors[0].waveform.seed, derive_sensor_seed(7, 1));
        assert_eq!(spec.sensors[1].waveform.seed, 1234, "pinned seed wins");
    }

    #[test]
    fn profile_id_mismatch_is_rejected() {
        let profile = valid_profile();
        let mut file = constant_scenario(&profile, 10, 20.0);
        file.profile_id = 2;
        assert!(matches!(
            resolve_scenario(&file, &profile, None, None),
            Err(SimError::ConfigMismatch(_))
        ));
    }

    #[test]
    fn uncovered_sensor_is_rejected() {
        let profile = valid_profile();
        let mut file = constant_scenario(&profile, 10, 20.0);
        file.sensors.remove(1);
        let err = resolve_scenario(&file, &profile, None, None).unwrap_err();
        assert!(matches!(err, SimError::ConfigMismatch(_)));
        assert!(err.to_string().contains("sensor 2"));
    }

    #[test]
    fn unknown_sensor_is_rejected() {
        let profile = valid_profile();
        let mut file = constant_scenario(&profile, 10, 20.0);
        file.sensors.push(ScenarioSensor {
            id: SensorId(9),
            start_cycle: 0,
            waveform: WaveformSpec::constant(0.0),
            seed: None,
            faults: Vec::new(),
        });
        assert!(matches!(
            resolve_scenario(&file, &profile, None, None).unwrap_err(),
            SimError::ConfigMismatch(_)
        ));
    }

    #[test]
    fn overlapping_faults_are_rejected() {
        let profile = valid_profile();
        let mut file = constant_scenario(&profile, 100, 20.0);
        file.sensors[0].faults = vec![
            FaultSpec {
                kind: FaultKind::Silent,
                start_cycle: 10,
                end_cycle: Some(20),
                magnitude: 0.0,
            },
            FaultSpec {
                kind: FaultKind::Offset,
                start_cycle: 20,
                end_cycle: Some(30),
                magnitude: 1.0,
            },
        ];
        assert!(matches!(
            resolve_scenario(&file, &profile, None, None).unwrap_err(),
            SimError::BadScenario(_)
        ));
    }

    #[test]
    fn open_ended_fault_overlaps_everything_after_it() {
        let profile = valid_profile();
        let mut file = constant_scenario(&profile, 100, 20.0);
        file.sensors[0].faults = vec![
            FaultSpec {
                kind: FaultKind::Silent,
                start_cycle: 10,
                end_cycle: None,
                magnitude: 0.0,
            },
            FaultSpec {
                kind: FaultKind::Offset,
                start_cycle: 50,
                end_cycle: Some(60),
                magnitude: 1.0,
            },
        ];
        assert!(resolve_scenario(&file, &profile, None, None).is_err());
    }

    #[test]
    fn spike_range_is_its_single_cycle() {
        let profile = valid_profile();
        let mut file = constant_scenario(&profile, 100, 20.0);
        file.sensors[0].faults = vec![
            FaultSpec {
                kind: FaultKind::Spike,
                start_cycle: 10,
                end_cycle: None,
                magnitude: 5.0,
            },
            FaultSpec {
                kind: FaultKind::Offset,
                start_cycle: 11,
                end_cycle: Some(20),
                magnitude: 1.0,
            },
        ];
        assert!(resolve_scenario(&file, &profile, None, None).is_ok());
    }

    #[test]
    fn scenario_round_trips_through_toml() {
        let profile = valid_profile();
        let mut file = constant_scenario(&profile, 25, 20.0);
        file.sensors[0].faults.push(FaultSpec {
            kind: FaultKind::Babble,
            start_cycle: 5,
            end_cycle: Some(9),
            magnitude: 6.0,
        });
        let text = serialize_scenario(&file).unwrap();
        assert!(text.contains("profileId"));
        assert!(text.contains("totalCycles"));
        assert!(text.contains("startCycle"));
        let back = parse_scenario(&text).unwrap();
        assert_eq!(back, file);
    }
}
