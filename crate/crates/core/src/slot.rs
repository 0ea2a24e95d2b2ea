//! On-media layout of one durable slot.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "ESRW"
//!      4     2  format version (u16)
//!      6     8  iteration (u64)
//!     14     4  owner rank (u32)
//!     18     8  payload length (u64)
//!     26     8  generation (u64)
//!     34     8  checksum (u64)
//!     42     …  payload
//! ```
//!
//! All integers little-endian. The checksum is 64-bit FNV-1a over bytes
//! `0..34` followed by the payload.

use std::hash::Hasher;

use fnv::FnvHasher;
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"ESRW";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 42;
const CHECKSUM_OFFSET: usize = 34;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SlotError {
    #[error("slot truncated: {0} bytes")]
    Truncated(usize),
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported format version {0}")]
    Version(u16),
    #[error("checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    Checksum { stored: u64, computed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotHeader {
    pub iteration: u64,
    pub owner: u32,
    pub payload_len: u64,
    pub generation: u64,
    pub checksum: u64,
}

impl SlotHeader {
    fn prefix(&self) -> [u8; CHECKSUM_OFFSET] {
        let mut b = [0u8; CHECKSUM_OFFSET];
        b[0..4].copy_from_slice(&MAGIC);
        b[4..6].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
        b[6..14].copy_from_slice(&self.iteration.to_le_bytes());
        b[14..18].copy_from_slice(&self.owner.to_le_bytes());
        b[18..26].copy_from_slice(&self.payload_len.to_le_bytes());
        b[26..34].copy_from_slice(&self.generation.to_le_bytes());
        b
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[..CHECKSUM_OFFSET].copy_from_slice(&self.prefix());
        b[CHECKSUM_OFFSET..].copy_from_slice(&self.checksum.to_le_bytes());
        b
    }
}

pub fn checksum(prefix: &[u8], payload: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(prefix);
    h.write(payload);
    h.finish()
}

/// Header for `payload` with the checksum filled in.
pub fn seal(iteration: u64, owner: u32, generation: u64, payload: &[u8]) -> SlotHeader {
    let mut h = SlotHeader {
        iteration,
        owner,
        payload_len: payload.len() as u64,
        generation,
        checksum: 0,
    };
    h.checksum = checksum(&h.prefix(), payload);
    h
}

pub fn encode_slot(iteration: u64, owner: u32, generation: u64, payload: &[u8]) -> Vec<u8> {
    let h = seal(iteration, owner, generation, payload);
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&h.encode());
    out.extend_from_slice(payload);
    out
}

/// Parse and validate a slot image; trailing bytes beyond the payload are
/// ignored.
pub fn decode_slot(bytes: &[u8]) -> Result<(SlotHeader, &[u8]), SlotError> {
    if bytes.len() < HEADER_LEN {
        return Err(SlotError::Truncated(bytes.len()));
    }
    if bytes[0..4] != MAGIC {
        return Err(SlotError::BadMagic);
    }
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(SlotError::Version(version));
    }
    let header = SlotHeader {
        iteration: u64_at(6),
        owner: u32::from_le_bytes(bytes[14..18].try_into().unwrap()),
        payload_len: u64_at(18),
        generation: u64_at(26),
        checksum: u64_at(CHECKSUM_OFFSET),
    };
    let end = usize::try_from(header.payload_len)
        .ok()
        .and_then(|l| l.checked_add(HEADER_LEN))
        .filter(|&e| e <= bytes.len())
        .ok_or(SlotError::Truncated(bytes.len()))?;
    let payload = &bytes[HEADER_LEN..end];
    let computed = checksum(&bytes[..CHECKSUM_OFFSET], payload);
    if computed != header.checksum {
        return Err(SlotError::Checksum { stored: header.checksum, computed });
    }
    Ok((header, payload))
}
