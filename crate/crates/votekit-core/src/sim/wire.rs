//! Datagram encoding of the poll/response protocol.
//!
//! All integers are big-endian. A POLL is 12 bytes, a DATA response 18:
//!
//! ```text
//! POLL:  56 46 | 01 | 00 | profileId:u16 | sensorId:u16 | seq:u32
//! DATA:  56 46 | 01 | 01 | profileId:u16 | sensorId:u16 | seq:u32
//!        | status:u8 | bitSize:u8 | rawValue:i32
//! ```
//!
//! `seq` in a DATA frame echoes the poll it answers. `status` 0 is OK and 1
//! signals a device-detected fault. `rawValue` carries the reading
//! sign-extended to 32 bits; `bitSize` states the sensor's native width.

use thiserror::Error;

use crate::model::SensorId;

pub const MAGIC: [u8; 2] = [0x56, 0x46];
pub const VERSION: u8 = 0x01;
pub const MSG_POLL: u8 = 0x00;
pub const MSG_DATA: u8 = 0x01;
pub const POLL_LEN: usize = 12;
pub const DATA_LEN: usize = 18;

pub const STATUS_OK: u8 = 0;
pub const STATUS_SENSOR_FAULT: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PollFrame {
    pub profile_id: u16,
    pub sensor_id: SensorId,
    pub seq: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DataFrame {
    pub profile_id: u16,
    pub sensor_id: SensorId,
    pub seq: u32,
    pub status: u8,
    pub bit_size: u8,
    pub raw_value: i32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WireError {
    #[error("frame length {0} does not match the expected {1}")]
    BadLength(usize, usize),
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported protocol version {0}")]
    BadVersion(u8),
    #[error("unexpected message type {0:#04x}")]
    BadMsgType(u8),
}

pub fn encode_poll(frame: &PollFrame) -> [u8; POLL_LEN] {
    let mut buf = [0u8; POLL_LEN];
    buf[0..2].copy_from_slice(&MAGIC);
    buf[2] = VERSION;
    buf[3] = MSG_POLL;
    buf[4..6].copy_from_slice(&frame.profile_id.to_be_bytes());
    buf[6..8].copy_from_slice(&frame.sensor_id.0.to_be_bytes());
    buf[8..12].copy_from_slice(&frame.seq.to_be_bytes());
    buf
}

pub fn decode_poll(bytes: &[u8]) -> Result<PollFrame, WireError> {
    check_header(bytes, POLL_LEN, MSG_POLL)?;
    Ok(PollFrame {
        profile_id: u16::from_be_bytes([bytes[4], bytes[5]]),
        sensor_id: SensorId(u16::from_be_bytes([bytes[6], bytes[7]])),
        seq: u32::from_be_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]),
    })
}

pub fn encode_data(frame: &DataFrame) -> [u8; DATA_LEN] {
    let mut buf = [0u8; DATA_LEN];
    buf[0..2].copy_from_slice(&MAGIC);
    buf[2] = VERSION;
    buf[3] = MSG_DATA;
    buf[4..6].copy_from_slice(&frame.profile_id.to_be_bytes());
    buf[6..8].copy_from_slice(&frame.sensor_id.0.to_be_bytes());
    buf[8..12].copy_from_slice(&frame.seq.to_be_bytes());
    buf[12] = frame.status;
    buf[13] = frame.bit_size;
    buf[14..18].copy_from_slice(&frame.raw_value.to_be_bytes());
    buf
}

pub fn decode_data(bytes: &[u8]) -> Result<DataFrame, WireError> {
    check_header(bytes, DATA_LEN, MSG_DATA)?;
    Ok(DataFrame {
        profile_id: u16::from_be_bytes([bytes[4], bytes[5]]),
        sensor_id: SensorId(u16::from_be_bytes([bytes[6], bytes[7]])),
        seq: u32::from_be_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]),
        status: bytes[12],
        bit_size: bytes[13],
        raw_value: i32::from_be_bytes([bytes[14], bytes[15], bytes[16], bytes[17]]),
    })
}

fn check_header(bytes: &[u8], expected_len: usize, expected_type: u8) -> Result<(), WireError> {
    if bytes.len() != expected_len {
        return Err(WireError::BadLength(bytes.len(), expected_len));
    }
    if bytes[0..2] != MAGIC {
        return Err(WireError::BadMagic);
    }
    if bytes[2] != VERSION {
        return Err(WireError::BadVersion(bytes[2]));
    }
    if bytes[3] != expected_type {
        return Err(WireError::BadMsgType(bytes[3]));
    }
    Ok(())
}

/// Clamps an ideal raw reading to the range representable at a bit width,
/// then sign-extends to i32.
pub fn clamp_to_bit_size(raw: i64, bit_size: u8) -> i32 {
    let (min, max) = match bit_size {
        8 => (i8::MIN as i64, i8::MAX as i64),
        16 => (i16::MIN as i64, i16::MAX as i64),
        _ => (i32::MIN as i64, i32::MAX as i64),
    };
    raw.clamp(min, max) as i32
}
