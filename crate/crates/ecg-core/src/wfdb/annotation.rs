//! MIT-format annotation (`.atr`) parsing.
//!
//! The stream is a sequence of little-endian 16-bit words. Each word splits
//! into a 6-bit code and a 10-bit sample delta:
//!
//! ```text
//! code  = word >> 10
//! delta = word & 0x3FF
//! ```
//!
//! Ordinary codes (1..=49) advance the running sample counter by `delta`
//! and mark an event there; beat codes become [`BeatAnnotation`]s, non-beat
//! events (rhythm changes, noise markers, ...) advance time but produce
//! nothing. Pseudo-codes handle everything else:
//!
//! - `59` SKIP: the next four bytes are a signed 32-bit delta in PDP-11
//!   order (high word first, each word little-endian), added to the counter;
//! - `60` NUM / `61` SUB / `62` CHN: attribute updates, ignored here;
//! - `63` AUX: `delta` bytes of free text follow, padded to even length;
//! - code 0 with delta 0: end of stream.

use super::{aami_class_for_code, is_beat_code, symbol_for_code, BeatAnnotation, WfdbError};

/// Parses an annotation byte stream, keeping only beat annotations.
///
/// `n_samples` bounds the sample counter: an annotation beyond it means the
/// file does not belong to the signal it is being read against. Beat sample
/// indices must be strictly increasing.
pub fn parse_annotations(bytes: &[u8], n_samples: u64) -> Result<Vec<BeatAnnotation>, WfdbError> {
    let mut beats = Vec::new();
    let mut time: i64 = 0;
    let mut pending_skip: i64 = 0;
    let mut pos = 0usize;

    while pos + 2 <= bytes.len() {
        let word_pos = pos;
        let word = u16::from_le_bytes([bytes[pos], bytes[pos + 1]]);
        pos += 2;
        let code = (word >> 10) as u8;
        let delta = (word & 0x3FF) as i64;

        match code {
            0 if delta == 0 => break, // end-of-stream marker
            59 => {
                // SKIP: 4 extra bytes, PDP-11 long (high word, low word).
                if pos + 4 > bytes.len() {
                    return Err(ann_err(word_pos, "SKIP interval runs past end of stream"));
                }
                let high = u16::from_le_bytes([bytes[pos], bytes[pos + 1]]) as u32;
                let low = u16::from_le_bytes([bytes[pos + 2], bytes[pos + 3]]) as u32;
                pending_skip += (high << 16 | low) as i32 as i64;
                pos += 4;
            }
            60..=62 => {} // NUM / SUB / CHN: value in delta, no time change
            63 => {
                // AUX: delta bytes of text, padded to even length.
                let len = (delta as usize + 1) & !1;
                if pos + len > bytes.len() {
                    return Err(ann_err(word_pos, "AUX string runs past end of stream"));
                }
                pos += len;
            }
            _ => {
                time += pending_skip + delta;
                pending_skip = 0;
                if time < 0 {
                    return Err(ann_err(word_pos, format!("sample counter went negative ({time})")));
                }
                if time as u64 > n_samples {
                    return Err(ann_err(
                        word_pos,
                        format!("sample counter {time} past record end {n_samples}"),
                    ));
                }
                if is_beat_code(code) {
                    let sample = time as u64;
                    if let Some(last) = beats.last() {
                        let last: &BeatAnnotation = last;
                        if sample <= last.sample {
                            return Err(ann_err(
                                word_pos,
                                format!("beat samples not strictly increasing ({} then {sample})", last.sample),
                            ));
                        }
                    }
                    beats.push(BeatAnnotation {
                        sample,
                        code,
                        symbol: symbol_for_code(code).unwrap_or('"'),
                        aami: aami_class_for_code(code).expect("beat codes always map"),
                    });
                }
            }
        }
    }
    Ok(beats)
}

fn ann_err(offset: usize, msg: impl Into<String>) -> WfdbError {
    WfdbError::Annotation { offset, msg: msg.into() }
}
