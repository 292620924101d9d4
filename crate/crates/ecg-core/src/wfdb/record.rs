//! Whole-record loading: header + signal data + annotations.

use std::path::Path;

use super::{decode_212, parse_annotations, parse_header, signal, BeatAnnotation, RecordHeader, WfdbError};

/// A fully decoded record: header, per-channel ADC samples, and beat
/// annotations (empty when no `.atr` file is present).
#[derive(Debug, Clone)]
pub struct EcgRecord {
    pub header: RecordHeader,
    /// ADC samples per channel, `signals[ch][n]`.
    pub signals: Vec<Vec<i32>>,
    /// Beat annotations in increasing sample order.
    pub annotations: Vec<BeatAnnotation>,
}

impl EcgRecord {
    /// Samples per channel.
    pub fn n_samples(&self) -> usize {
        self.signals.first().map_or(0, Vec::len)
    }

    /// Millivolt view of one channel: `(sample - baseline) / gain`.
    pub fn channel_mv(&self, channel: usize) -> Vec<f64> {
        let spec = &self.header.signals[channel];
        let baseline = spec.baseline as f64;
        let gain = spec.gain;
        self.signals[channel].iter().map(|&s| (s as f64 - baseline) / gain).collect()
    }
}

/// Loads `NAME.hea`, `NAME.dat`, and (if present) `NAME.atr` from `dir`.
///
/// All signals must live in one shared `.dat` file in format 212, which is
/// how every record in the arrhythmia database is stored; other layouts are
/// rejected as unsupported rather than guessed at.
pub fn load_record(dir: &Path, name: &str) -> Result<EcgRecord, WfdbError> {
    let header_text = std::fs::read_to_string(dir.join(format!("{name}.hea")))?;
    let header = parse_header(&header_text)?;

    for spec in &header.signals {
        if spec.format != 212 {
            return Err(WfdbError::UnsupportedFormat(spec.format));
        }
    }
    let dat_name = &header.signals[0].file_name;
    if header.signals.iter().any(|s| &s.file_name != dat_name) {
        return Err(WfdbError::Parse {
            line: 2,
            msg: "signals split across multiple .dat files are not supported".into(),
        });
    }

    let bytes = std::fs::read(dir.join(dat_name))?;
    let n_samples = header.n_samples as usize;
    let expected = signal::required_bytes(n_samples * header.n_signal);
    if bytes.len() < expected {
        return Err(WfdbError::Truncated {
            what: format!("{dat_name} ({} of {} channels declared)", header.n_signal, header.n_signal),
            expected,
            actual: bytes.len(),
        });
    }
    let signals = decode_212(&bytes, n_samples, header.n_signal)?;

    let atr_path = dir.join(format!("{name}.atr"));
    let annotations = if atr_path.exists() {
        parse_annotations(&std::fs::read(atr_path)?, header.n_samples)?
    } else {
        Vec::new()
    };

    Ok(EcgRecord { header, signals, annotations })
}
