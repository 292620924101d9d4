//! Minimal WFDB-format writers, for tests and fixture generation only.
//!
//! Production code in this crate never writes records — these helpers exist
//! so test suites can fabricate well-formed `.hea`/`.dat`/`.atr` triples and
//! round-trip them through the readers in [`crate::wfdb`]. They write the
//! exact layout the arrhythmia database uses: a shared format-212 `.dat`,
//! gain 200, baseline 1024, 11-bit ADC.

use std::io;
use std::path::{Path, PathBuf};

use crate::wfdb::encode_212;

/// Writes the three files of a record and returns their paths
/// (`.hea`, `.dat`, `.atr` in that order).
///
/// `annotations` are `(sample, code)` events in non-decreasing sample order;
/// codes may include non-beat events. See [`annotation_bytes`].
///
/// # Panics
///
/// Panics if channel lengths differ or `lead_names` does not match the
/// channel count.
pub fn write_record_files(
    dir: &Path,
    name: &str,
    sampling_rate: u32,
    channels: &[Vec<i32>],
    lead_names: &[&str],
    annotations: &[(u64, u8)],
) -> io::Result<Vec<PathBuf>> {
    assert_eq!(channels.len(), lead_names.len(), "one lead name per channel");
    let n = channels[0].len();
    assert!(channels.iter().all(|c| c.len() == n), "equal-length channels");

    let hea = dir.join(format!("{name}.hea"));
    let dat = dir.join(format!("{name}.dat"));
    let atr = dir.join(format!("{name}.atr"));

    std::fs::write(&hea, header_text(name, sampling_rate, n as u64, lead_names))?;

    let mut interleaved = Vec::with_capacity(n * channels.len());
    for i in 0..n {
        for ch in channels {
            interleaved.push(ch[i]);
        }
    }
    std::fs::write(&dat, encode_212(&interleaved))?;
    std::fs::write(&atr, annotation_bytes(annotations))?;
    Ok(vec![hea, dat, atr])
}

/// Header text in the database's house style.
pub fn header_text(name: &str, sampling_rate: u32, n_samples: u64, lead_names: &[&str]) -> String {
    let mut text = format!("{name} {} {sampling_rate} {n_samples}\n", lead_names.len());
    for lead in lead_names {
        text.push_str(&format!("{name}.dat 212 200 11 1024 0 0 0 {lead}\n"));
    }
    text
}

/// Serializes `(sample, code)` events into the MIT annotation format.
///
/// Deltas above the 10-bit range are emitted as a SKIP pseudo-annotation
/// carrying a PDP-11-ordered signed long, followed by the event word with a
/// zero delta. Rhythm-change events (code 28, `+`) get a fixed `(N` AUX
/// string attached, as real files have. The stream ends with the
/// conventional all-zero word.
pub fn annotation_bytes(annotations: &[(u64, u8)]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(annotations.len() * 2 + 2);
    let mut time = 0u64;
    for &(sample, code) in annotations {
        assert!(sample >= time, "annotations must be in non-decreasing sample order");
        assert!(code >= 1 && code <= 49, "event codes must be in 1..=49, got {code}");
        let delta = sample - time;
        if delta > 1023 {
            bytes.extend(word(59, 0));
            let long = i32::try_from(delta).expect("delta fits a signed long") as u32;
            bytes.extend(((long >> 16) as u16).to_le_bytes());
            bytes.extend((long as u16).to_le_bytes());
            bytes.extend(word(code, 0));
        } else {
            bytes.extend(word(code, delta as u16));
        }
        if code == 28 {
            bytes.extend(word(63, 3)); // AUX, 3 text bytes padded to 4
            bytes.extend([b'(', b'N', 0, 0]);
        }
        time = sample;
    }
    bytes.extend(word(0, 0));
    bytes
}

fn word(code: u8, delta: u16) -> [u8; 2] {
    debug_assert!(delta < 1024);
    ((code as u16) << 10 | delta).to_le_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wfdb::{load_record, parse_annotations};

    #[test]
    fn written_records_load_back_intact() {
        let dir = tempfile::tempdir().unwrap();
        let ch0: Vec<i32> = (0..500).map(|i| 1024 + (i % 40) - 20).collect();
        let ch1: Vec<i32> = (0..500).map(|i| 1024 - (i % 30) + 15).collect();
        let anns = vec![(10, 28), (120, 1), (260, 5), (410, 1)];
        write_record_files(dir.path(), "w1", 360, &[ch0.clone(), ch1.clone()], &["MLII", "V5"], &anns)
            .unwrap();

        let rec = load_record(dir.path(), "w1").unwrap();
        assert_eq!(rec.header.sampling_rate, 360);
        assert_eq!(rec.signals[0], ch0);
        assert_eq!(rec.signals[1], ch1);
        // The rhythm '+' is consumed as a non-beat; three beats remain.
        let got: Vec<(u64, char)> = rec.annotations.iter().map(|b| (b.sample, b.symbol)).collect();
        assert_eq!(got, vec![(120, 'N'), (260, 'V'), (410, 'N')]);
    }

    #[test]
    fn long_gaps_round_trip_through_skip_words() {
        let anns = vec![(5, 1), (200_000, 1), (200_900, 5)];
        let beats = parse_annotations(&annotation_bytes(&anns), 650_000).unwrap();
        let got: Vec<(u64, u8)> = beats.iter().map(|b| (b.sample, b.code)).collect();
        assert_eq!(got, anns);
    }
}
