//! Format-212 sample packing.
//!
//! Format 212 stores two 12-bit two's-complement samples in each 3-byte
//! group. For bytes `b0 b1 b2`:
//!
//! ```text
//! sample 1 = (b1 & 0x0F) << 8 | b0
//! sample 2 = (b1 & 0xF0) << 4 | b2
//! ```
//!
//! both sign-extended from 12 bits. Samples from all channels are
//! interleaved frame by frame (ch0, ch1, ch0, ch1, ... for two channels).
//! When the total sample count is odd the final group is 2 bytes: the lone
//! sample's low byte and its high nibble.

use super::WfdbError;

/// Decodes a format-212 byte stream into per-channel sample vectors.
///
/// `n_samples` is the per-channel length; `bytes` must hold at least
/// `ceil(n_samples * n_channels * 3 / 2)` bytes. Extra trailing bytes
/// (write padding) are tolerated; a short buffer is reported as
/// [`WfdbError::Truncated`].
pub fn decode_212(
    bytes: &[u8],
    n_samples: usize,
    n_channels: usize,
) -> Result<Vec<Vec<i32>>, WfdbError> {
    assert!(n_channels > 0, "decode_212 requires at least one channel");
    let total = n_samples
        .checked_mul(n_channels)
        .expect("sample count overflow");
    let expected = required_bytes(total);
    if bytes.len() < expected {
        return Err(WfdbError::Truncated {
            what: "format-212 signal data".into(),
            expected,
            actual: bytes.len(),
        });
    }

    let mut flat = Vec::with_capacity(total);
    let mut groups = bytes.chunks_exact(3);
    for group in groups.by_ref() {
        if flat.len() + 2 > total {
            break;
        }
        let (b0, b1, b2) = (group[0] as u32, group[1] as u32, group[2] as u32);
        flat.push(sign_extend_12((b1 & 0x0F) << 8 | b0));
        flat.push(sign_extend_12((b1 & 0xF0) << 4 | b2));
    }
    if flat.len() < total {
        // Odd total: one sample left, packed in two bytes.
        let rest = &bytes[flat.len() / 2 * 3..];
        let (b0, b1) = (rest[0] as u32, rest[1] as u32);
        flat.push(sign_extend_12((b1 & 0x0F) << 8 | b0));
    }

    let mut channels = vec![Vec::with_capacity(n_samples); n_channels];
    for (i, v) in flat.into_iter().enumerate() {
        channels[i % n_channels].push(v);
    }
    Ok(channels)
}

/// Packs interleaved samples into format-212 bytes (round-trip helper used
/// by the fixture writer and tests).
///
/// # Panics
///
/// Panics if any value is outside the 12-bit two's-complement range
/// `-2048..=2047`.
pub fn encode_212(samples: &[i32]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(required_bytes(samples.len()));
    let mut pairs = samples.chunks_exact(2);
    for pair in pairs.by_ref() {
        let (s1, s2) = (to_raw_12(pair[0]), to_raw_12(pair[1]));
        bytes.push((s1 & 0xFF) as u8);
        bytes.push(((s1 >> 8) & 0x0F | (s2 >> 8) << 4) as u8);
        bytes.push((s2 & 0xFF) as u8);
    }
    if let [last] = pairs.remainder() {
        let s = to_raw_12(*last);
        bytes.push((s & 0xFF) as u8);
        bytes.push((s >> 8) as u8);
    }
    bytes
}

/// Bytes needed to store `total` samples in format 212: 3 per pair plus 2
/// for a trailing lone sample.
pub fn required_bytes(total: usize) -> usize {
    total / 2 * 3 + total % 2 * 2
}

fn sign_extend_12(raw: u32) -> i32 {
    debug_assert!(raw < 4096);
    if raw >= 2048 {
        raw as i32 - 4096
    } else {
        raw as i32
    }
}

fn to_raw_12(value: i32) -> u32 {
    assert!(
        (-2048..=2047).contains(&value),
        "sample {value} outside 12-bit range"
    );
    (value & 0xFFF) as u32
}
