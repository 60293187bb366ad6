//! Emulated sensor endpoint: answers polls according to its waveform and
//! fault schedule. The same endpoint logic backs both clock modes; REAL
//! mode merely moves the frames over UDP.

use crate::model::SensorId;
use crate::sim::fault::{FaultKind, FaultSpec};
use crate::sim::waveform::WaveformSpec;
use crate::sim::wire::{clamp_to_bit_size, decode_poll, DataFrame, PollFrame, STATUS_OK};

/// One response the endpoint wants to send, `latency_micros` after the poll.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseFrame {
    pub data: DataFrame,
    pub latency_micros: u64,
}

/// Deterministic emulation of one sensor device.
#[derive(Debug, Clone)]
pub struct SensorEndpoint {
    pub sensor_id: SensorId,
    pub profile_id: u16,
    pub bit_size: u8,
    pub scale: f64,
    /// First cycle at which the device is powered and answers polls.
    pub start_cycle: u64,
    pub waveform: WaveformSpec,
    pub faults: Vec<FaultSpec>,
    /// Datagrams that failed to decode as polls.
    pub malformed_polls: u64,
}

impl SensorEndpoint {
    /// Decodes a datagram and answers it; malformed input is counted and
    /// dropped. The cycle is derived from the poll sequence (polls start
    /// at 1 for cycle 0).
    pub fn handle_datagram(&mut self, bytes: &[u8]) -> Vec<ResponseFrame> {
        match decode_poll(bytes) {
            Ok(poll) => {
                let cycle = poll.seq.saturating_sub(1) as u64;
                self.respond(&poll, cycle)
            }
            Err(_) => {
                self.malformed_polls += 1;
                Vec::new()
            }
        }
    }

    /// Responses to one poll at a given cycle. Zero frames model silence,
    /// several model babble.
    pub fn respond(&mut self, poll: &PollFrame, cycle: u64) -> Vec<ResponseFrame> {
        if poll.sensor_id != self.sensor_id || poll.profile_id != self.profile_id {
            return Vec::new();
        }
        if cycle < self.start_cycle {
            return Vec::new();
        }

        let fault = self
            .faults
            .iter()
            .find(|f| f.active_at(cycle))
            .cloned()
            .unwrap_or(FaultSpec {
                kind: FaultKind::None,
                start_cycle: 0,
                end_cycle: None,
                magnitude: 0.0,
            });

        if fault.kind == FaultKind::Silent {
            return Vec::new();
        }

        let value = match fault.kind {
            FaultKind::Stuck => self.waveform.value_at(fault.start_cycle),
            FaultKind::Offset | FaultKind::Spike => {
                self.waveform.value_at(cycle) + fault.magnitude
            }
            _ => self.waveform.value_at(cycle),
        };
        let raw = clamp_to_bit_size((value / self.scale).round() as i64, self.bit_size);

        let seq = match fault.kind {
            FaultKind::DuplicateSeq => poll.seq.saturating_sub(1),
            _ => poll.seq,
        };
        let latency = match fault.kind {
            FaultKind::Delay => fault.magnitude.max(0.0) as u64,
            _ => 0,
        };
        let copies = match fault.kind {
            FaultKind::Babble => (fault.magnitude as u64).max(1) as usize,
            _ => 1,
        };

        let data = DataFrame {
            profile_id: self.profile_id,
            sensor_id: self.sensor_id,
            seq,
            status: STATUS_OK,
            bit_size: self.bit_size,
            raw_value: raw,
        };
        vec![
            ResponseFrame {
                data,
                latency_micros: latency,
            };
            copies
        ]
    }
}
