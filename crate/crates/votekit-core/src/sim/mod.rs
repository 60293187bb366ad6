//! Deterministic scenario execution against emulated sensors.
//!
//! VIRTUAL mode runs a logical clock in a single thread: time is pure
//! arithmetic, frames are queued data, and a scenario always replays
//! bit-identically. REAL mode drives the same endpoint logic over UDP
//! sockets on the loopback interface, one thread per sensor, paced on the
//! wall clock. Everything a cycle records is derived from cycle numbers and
//! decoded frames — never from wall-clock readings — so both modes produce
//! the same records when frames arrive within their windows.

pub mod endpoint;
pub mod fault;
pub mod scenario;
pub mod waveform;
pub mod wire;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{HealthRecord, HealthState, SensorId, SensorSample, VoteOutcome};
use crate::pipeline::{voting_manager, CycleContext};
use crate::profile::{health_snapshot, VoteProfile};
use endpoint::SensorEndpoint;
use scenario::{ClockMode, ScenarioSpec};
use wire::{DataFrame, PollFrame, STATUS_OK};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario error: {0}")]
    BadScenario(String),
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("bind failure: {0}")]
    BindFailure(String),
    #[error("transport failure: {0}")]
    Transport(String),
}

/// One sensor's health state change during a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HealthTransition {
    pub sensor_id: SensorId,
    pub from: HealthState,
    pub to: HealthState,
}

/// Everything one cycle produced.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle: u64,
    pub outcome: VoteOutcome,
    pub health_transitions: Vec<HealthTransition>,
    /// Samples delivered to the pipeline (after frame filtering).
    pub samples: Vec<SensorSample>,
}

/// Result of a complete scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub profile_id: u16,
    pub records: Vec<CycleRecord>,
    pub final_health: BTreeMap<SensorId, HealthRecord>,
    /// Frames dropped before the pipeline: malformed, foreign, or carrying
    /// a device fault status.
    pub dropped_frames: u64,
}

/// Runs a resolved scenario to completion under its clock mode.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioRun, SimError> {
    match spec.clock_mode {
        ClockMode::Virtual => virtual_clock::run(spec),
        ClockMode::Real => real_clock::run(spec),
    }
}

fn build_endpoints(spec: &ScenarioSpec) -> Vec<SensorEndpoint> {
    spec.sensors
        .iter()
        .map(|s| {
            let descriptor = spec
                .profile
                .sensor(s.id)
                .expect("resolution guarantees coverage");
            SensorEndpoint {
                sensor_id: s.id,
                profile_id: spec.profile.id,
                bit_size: descriptor.characteristics.bit_size,
                scale: descriptor.characteristics.scale,
                start_cycle: s.start_cycle,
                waveform: s.waveform.clone(),
                faults: s.faults.clone(),
                malformed_polls: 0,
            }
        })
        .collect()
}

/// Feeds one cycle's delivered frames through the pipeline and records the
/// result. `delivered` pairs each decoded frame with its receive time on
/// the scenario clock.
fn process_cycle(
    profile: &mut VoteProfile,
    cycle: u64,
    cycle_start_micros: u64,
    delivered: Vec<(u64, DataFrame)>,
    dropped_frames: &mut u64,
) -> CycleRecord {
    let mut samples: Vec<SensorSample> = Vec::new();
    let mut counts: BTreeMap<SensorId, u32> = BTreeMap::new();
    for (receive_time, frame) in &delivered {
        let known = profile.config().sensor(frame.sensor_id).is_some();
        if !known || frame.profile_id != profile.config().id || frame.status != STATUS_OK {
            *dropped_frames += 1;
            continue;
        }
        let descriptor = profile.config().sensor(frame.sensor_id).unwrap();
        let eng = frame.raw_value as f64 * descriptor.characteristics.scale;
        *counts.entry(frame.sensor_id).or_default() += 1;
        samples.push(SensorSample {
            sensor_id: frame.sensor_id,
            seq: frame.seq,
            receive_time_micros: *receive_time,
            raw_value: frame.raw_value,
            eng_value: eng,
            frame_count_this_cycle: 0,
        });
    }
    for sample in &mut samples {
        sample.frame_count_this_cycle = counts[&sample.sensor_id];
    }

    let before = health_snapshot(profile);
    let ctx = CycleContext::for_profile(cycle, cycle_start_micros, samples, profile);
    let outcome = voting_manager(&ctx, profile);
    let after = health_snapshot(profile);
    let health_transitions = before
        .iter()
        .filter(|(id, state)| after[id] != **state)
        .map(|(&sensor_id, &from)| HealthTransition {
            sensor_id,
            from,
            to: after[&sensor_id],
        })
        .collect();

    CycleRecord {
        cycle,
        outcome,
        health_transitions,
        samples: ctx.samples,
    }
}

/// Sensors to poll this cycle: every configured sensor whose health record
/// is not frozen in UNUSABLE.
fn poll_list(profile: &VoteProfile) -> Vec<SensorId> {
    profile
        .config()
        .sensors
        .iter()
        .map(|s| s.id)
        .filter(|id| {
            profile
                .health(*id)
                .map(|r| r.state != HealthState::Unusable)
                .unwrap_or(false)
        })
        .collect()
}

mod virtual_clock {
    use super::*;

    /// Single-threaded logical-time run. Responses carry latencies; a frame
    /// whose arrival misses the cycle's voting window is queued and
    /// delivered when the controller next listens, exactly like a datagram
    /// waiting in a socket buffer.
    pub fn run(spec: &ScenarioSpec) -> Result<ScenarioRun, SimError> {
        let cycle_time = spec.profile.cycle_time_micros;
        let voting_offset = spec.profile.voting_offset_micros;
        let mut profile = VoteProfile::new(spec.profile.clone());
        let mut endpoints = build_endpoints(spec);
        let mut pending: Vec<(u64, DataFrame)> = Vec::new();
        let mut records = Vec::with_capacity(spec.total_cycles as usize);
        let mut dropped_frames = 0u64;

        for cycle in 0..spec.total_cycles {
            let cycle_start = cycle * cycle_time;
            let deadline = cycle_start + voting_offset;

            let mut delivered: Vec<(u64, DataFrame)> = Vec::new();
            pending.retain(|&(arrival, frame)| {
                let readable_at = arrival.max(cycle_start);
                if readable_at < deadline {
                    delivered.push((readable_at, frame));
                    false
                } else {
                    true
                }
            });

            for id in poll_list(&profile) {
                let poll = PollFrame {
                    profile_id: spec.profile.id,
                    sensor_id: id,
                    seq: (cycle + 1) as u32,
                };
                let endpoint = endpoints
                    .iter_mut()
                    .find(|e| e.sensor_id == id)
                    .expect("endpoint per configured sensor");
                for response in endpoint.respond(&poll, cycle) {
                    let arrival = cycle_start + response.latency_micros;
                    if arrival < deadline {
                        delivered.push((arrival, response.data));
                    } else {
                        pending.push((arrival, response.data));
                    }
                }
            }
            delivered.sort_by_key(|&(t, f)| (t, f.sensor_id, f.seq));

            records.push(process_cycle(
                &mut profile,
                cycle,
                cycle_start,
                delivered,
                &mut dropped_frames,
            ));
        }

        Ok(ScenarioRun {
            profile_id: spec.profile.id,
            records,
            final_health: profile.health_records().clone(),
            dropped_frames,
        })
    }
}

mod real_clock {
    use super::*;
    use std::net::UdpSocket;
    use std::sync::atomic::{AtomicBool, Ordering};
    use std::sync::Arc;
    use std::time::{Duration, Instant};

    /// Wall-clock run over UDP on 127.0.0.1. Each sensor endpoint runs on
    /// its own thread behind its own socket and answers polls to their
    /// source address. The controller paces cycles on an absolute time
    /// grid; the run lasts totalCycles * cycleTimeMicros.
    pub fn run(spec: &ScenarioSpec) -> Result<ScenarioRun, SimError> {
        let cycle_time = spec.profile.cycle_time_micros;
        let voting_offset = spec.profile.voting_offset_micros;

        let controller = UdpSocket::bind("127.0.0.1:0")
            .map_err(|e| SimError::BindFailure(format!("controller socket: {e}")))?;

        // Bind every socket before spawning anything so a bind failure
        // cannot leave worker threads behind.
        let mut bound = Vec::new();
        let mut endpoint_addrs = BTreeMap::new();
        for endpoint in build_endpoints(spec) {
            let socket = UdpSocket::bind("127.0.0.1:0").map_err(|e| {
                SimError::BindFailure(format!("sensor {} socket: {e}", endpoint.sensor_id))
            })?;
            socket
                .set_read_timeout(Some(Duration::from_millis(5)))
                .map_err(|e| SimError::BindFailure(e.to_string()))?;
            endpoint_addrs.insert(
                endpoint.sensor_id,
                socket
                    .local_addr()
                    .map_err(|e| SimError::BindFailure(e.to_string()))?,
            );
            bound.push((endpoint, socket));
        }
        let stop = Arc::new(AtomicBool::new(false));
        let workers: Vec<_> = bound
            .into_iter()
            .map(|(endpoint, socket)| {
                let stop = Arc::clone(&stop);
                std::thread::spawn(move || endpoint_loop(endpoint, socket, stop))
            })
            .collect();

        let mut profile = VoteProfile::new(spec.profile.clone());
        let mut records = Vec::with_capacity(spec.total_cycles as usize);
        let mut dropped_frames = 0u64;
        let start = Instant::now();
        let mut run_error = None;

        'cycles: for cycle in 0..spec.total_cycles {
            let cycle_start = cycle * cycle_time;
            sleep_until(start, cycle_start);

            for id in poll_list(&profile) {
                let poll = PollFrame {
                    profile_id: spec.profile.id,
                    sensor_id: id,
                    seq: (cycle + 1) as u32,
                };
                if let Err(e) = controller.send_to(&wire::encode_poll(&poll), endpoint_addrs[&id])
                {
                    run_error = Some(SimError::Transport(format!("poll send: {e}")));
                    break 'cycles;
                }
            }

            let mut delivered: Vec<(u64, DataFrame)> = Vec::new();
            let deadline = cycle_start + voting_offset;
            let mut buf = [0u8; 64];
            loop {
                let elapsed = start.elapsed().as_micros() as u64;
                if elapsed >= deadline {
                    break;
                }
                if let Err(e) =
                    controller.set_read_timeout(Some(Duration::from_micros(deadline - elapsed)))
                {
                    run_error = Some(SimError::Transport(e.to_string()));
                    break 'cycles;
                }
                match controller.recv_from(&mut buf) {
                    Ok((len, _)) => {
                        if let Ok(frame) = wire::decode_data(&buf[..len]) {
                            let receive_time = start.elapsed().as_micros() as u64;
                            delivered.push((receive_time, frame));
                        } else {
                            dropped_frames += 1;
                        }
                    }
                    Err(e)
                        if e.kind() == std::io::ErrorKind::WouldBlock
                            || e.kind() == std::io::ErrorKind::TimedOut => {}
                    Err(e) => {
                        run_error = Some(SimError::Transport(format!("receive: {e}")));
                        break 'cycles;
                    }
                }
            }

            records.push(process_cycle(
                &mut profile,
                cycle,
                cycle_start,
                delivered,
                &mut dropped_frames,
            ));
        }

        if run_error.is_none() {
            sleep_until(start, spec.total_cycles * cycle_time);
        }
        stop.store(true, Ordering::Relaxed);
        for worker in workers {
            let _ = worker.join();
        }
        if let Some(error) = run_error {
            return Err(error);
        }

        Ok(ScenarioRun {
            profile_id: spec.profile.id,
            records,
            final_health: profile.health_records().clone(),
            dropped_frames,
        })
    }

    fn sleep_until(start: Instant, micros: u64) {
        let target = start + Duration::from_micros(micros);
        loop {
            let now = Instant::now();
            if now >= target {
                return;
            }
            std::thread::sleep(target - now);
        }
    }

    fn endpoint_loop(mut endpoint: SensorEndpoint, socket: UdpSocket, stop: Arc<AtomicBool>) {
        let mut buf = [0u8; 64];
        while !stop.load(Ordering::Relaxed) {
            match socket.recv_from(&mut buf) {
                Ok((len, source)) => {
                    for response in endpoint.handle_datagram(&buf[..len]) {
                        if response.latency_micros > 0 {
                            std::thread::sleep(Duration::from_micros(response.latency_micros));
                        }
                        let _ = socket.send_to(&wire::encode_data(&response.data), source);
                    }
                }
                Err(e)
                    if e.kind() == std::io::ErrorKind::WouldBlock
                        || e.kind() == std::io::ErrorKind::TimedOut => {}
                Err(_) => break,
            }
        }
    }
}
