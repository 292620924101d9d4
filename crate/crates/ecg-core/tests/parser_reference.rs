//! Cross-checks the record readers against frozen dumps from an independent
//! decoder.
//!
//! The CSV files under `tests/fixtures/reference/` were produced by
//! `tools/ref_decode.py`, a from-scratch Python implementation of the same
//! on-disk formats.  Every header field, every sample of every channel, and
//! every beat annotation must agree exactly — any divergence means one of
//! the two decoders misreads the format.

use std::path::{Path, PathBuf};

use ecg_core::wfdb::load_record;

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn read_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
        .lines()
        .map(str::to_string)
        .collect()
}

fn check_record(name: &str) {
    let dir = fixtures_dir();
    let reference = dir.join("reference");
    let record = load_record(&dir, name).expect("fixture record loads");

    // --- header ----------------------------------------------------------
    let mut signal_rows = Vec::new();
    for line in read_lines(&reference.join(format!("{name}.header.csv"))) {
        let fields: Vec<&str> = line.split(',').collect();
        match fields[0] {
            "record" => assert_eq!(record.header.name, fields[1]),
            "n_signal" => assert_eq!(record.header.n_signal.to_string(), fields[1]),
            "sampling_rate" => assert_eq!(record.header.sampling_rate.to_string(), fields[1]),
            "n_samples" => assert_eq!(record.header.n_samples.to_string(), fields[1]),
            "signal" => signal_rows.push(fields.iter().map(|s| s.to_string()).collect::<Vec<_>>()),
            other => panic!("unexpected header row {other}"),
        }
    }
    assert_eq!(signal_rows.len(), record.header.signals.len());
    for row in &signal_rows {
        // signal,index,format,gain,baseline,adc_zero,adc_resolution,lead
        let index: usize = row[1].parse().unwrap();
        let spec = &record.header.signals[index];
        assert_eq!(spec.format.to_string(), row[2], "{name} ch{index} format");
        assert_eq!(spec.gain, row[3].parse::<f64>().unwrap(), "{name} ch{index} gain");
        assert_eq!(spec.baseline.to_string(), row[4], "{name} ch{index} baseline");
        assert_eq!(spec.adc_zero.to_string(), row[5], "{name} ch{index} adc zero");
        assert_eq!(
            spec.adc_resolution.to_string(),
            row[6],
            "{name} ch{index} adc resolution"
        );
        assert_eq!(spec.lead_name, row[7], "{name} ch{index} lead");
    }

    // --- samples ----------------------------------------------------------
    let signal_lines = read_lines(&reference.join(format!("{name}.signal.csv")));
    assert_eq!(signal_lines.len(), record.n_samples(), "{name} sample count");
    for (i, line) in signal_lines.iter().enumerate() {
        for (ch, field) in line.split(',').enumerate() {
            let expected: i32 = field.parse().unwrap();
            let got = record.signals[ch][i];
            assert_eq!(
                got, expected,
                "{name} sample {i} channel {ch}: decoder {got}, reference {expected}"
            );
        }
    }

    // --- beats -------------------------------------------------------------
    let beat_lines = read_lines(&reference.join(format!("{name}.beats.csv")));
    assert_eq!(beat_lines.len(), record.annotations.len(), "{name} beat count");
    for (beat, line) in record.annotations.iter().zip(&beat_lines) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(beat.sample.to_string(), fields[0], "{name} beat sample");
        assert_eq!(beat.code.to_string(), fields[1], "{name} beat code");
        assert_eq!(beat.symbol.to_string(), fields[2], "{name} beat symbol");
        assert_eq!(beat.aami.label().to_string(), fields[3], "{name} beat family");
    }
}

#[test]
fn record_100_matches_reference_dumps() {
    check_record("100");
}

#[test]
fn record_208_matches_reference_dumps() {
    check_record("208");
}

/// The long fixture also exercises annotation SKIP words, an AUX string, a
/// mid-record quality note, and a rhythm label sharing a beat's sample.
#[test]
fn record_106_matches_reference_dumps() {
    check_record("106");
}
