//! Deterministic signal generators for emulated sensors.
//!
//! Noise comes from splitmix64, chosen because it is a tiny, portable,
//! well-known generator whose output depends only on its 64-bit input. Every
//! noise draw is indexed purely by (seed, cycle), so values never depend on
//! evaluation order, clock mode or thread timing.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

/// One splitmix64 step: mixes a 64-bit input into a 64-bit output.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a per-sensor seed from the scenario master seed.
pub fn derive_sensor_seed(master_seed: u64, sensor_id: u16) -> u64 {
    splitmix64(master_seed ^ sensor_id as u64)
}

/// Uniform draw in [0, 1) for one (seed, cycle) pair.
fn unit_uniform(seed: u64, cycle: u64) -> f64 {
    let stream = seed.wrapping_add((cycle + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let bits = splitmix64(stream);
    // Top 53 bits give a uniform dyadic rational in [0, 1).
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WaveformKind {
    #[default]
    Constant,
    Ramp,
    Sine,
    NoisyConstant,
}

/// A sensor's ideal signal as a function of the cycle number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WaveformSpec {
    pub kind: WaveformKind,
    /// Baseline value (CONSTANT value, RAMP start, SINE centre).
    #[serde(default)]
    pub offset: f64,
    /// RAMP slope per cycle, or SINE amplitude.
    #[serde(default)]
    pub amplitude: f64,
    /// SINE period in cycles.
    #[serde(default = "default_period")]
    pub period: f64,
    /// Half-width of the NOISY_CONSTANT band around the offset.
    #[serde(default)]
    pub noise_range: f64,
    /// Noise seed; scenario resolution fills it from the master seed unless
    /// the scenario pins one explicitly.
    #[serde(default)]
    pub seed: u64,
}

fn default_period() -> f64 {
    1.0
}

impl WaveformSpec {
    pub fn constant(offset: f64) -> Self {
        WaveformSpec {
            kind: WaveformKind::Constant,
            offset,
            amplitude: 0.0,
            period: default_period(),
            noise_range: 0.0,
            seed: 0,
        }
    }

    /// Ideal value at a cycle; pure in (self, cycle).
    pub fn value_at(&self, cycle: u64) -> f64 {
        match self.kind {
            WaveformKind::Constant => self.offset,
            WaveformKind::Ramp => self.offset + self.amplitude * cycle as f64,
            WaveformKind::Sine => {
                self.offset + self.amplitude * (TAU * cycle as f64 / self.period).sin()
            }
            WaveformKind::NoisyConstant => {
                let u = unit_uniform(self.seed, cycle);
                self.offset + (2.0 * u - 1.0) * self.noise_range
            }
        }
    }
}
