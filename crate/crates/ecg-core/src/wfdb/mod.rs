//! MIT-BIH record ingestion.
//!
//! Handles the three files that make up an arrhythmia-database record:
//!
//! - `NAME.hea` — plain-text header describing signals ([`parse_header`])
//! - `NAME.dat` — format-212 packed ADC samples ([`decode_212`])
//! - `NAME.atr` — MIT-format beat annotations ([`parse_annotations`])
//!
//! [`load_record`] ties the three together into an [`EcgRecord`];
//! [`fetch_record`] downloads the triple over HTTP. Only format 212 is
//! supported — it is the format the entire arrhythmia database is stored
//! in — and anything else is rejected up front rather than misread.

mod annotation;
mod fetch;
mod header;
mod record;
mod signal;

pub use annotation::parse_annotations;
pub use fetch::{fetch_record, DEFAULT_BASE_URL};
pub use header::parse_header;
pub use record::{load_record, EcgRecord};
pub use signal::{decode_212, encode_212};

use serde::Serialize;

/// Errors produced while reading, validating, or fetching record files.
#[derive(Debug, thiserror::Error)]
pub enum WfdbError {
    /// Malformed header text; `line` is 1-based within the `.hea` file.
    #[error("header parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// Signal stored in a format this crate does not decode.
    #[error("unsupported signal format {0} (only format 212 is supported)")]
    UnsupportedFormat(u16),
    /// File ended before the declared content did — distinct from malformed
    /// content so callers can suggest re-fetching.
    #[error("{what} truncated: need {expected} bytes, have {actual}")]
    Truncated { what: String, expected: usize, actual: usize },
    /// Malformed annotation stream; `offset` is the byte position.
    #[error("annotation error at byte {offset}: {msg}")]
    Annotation { offset: usize, msg: String },
    /// Network or HTTP failure; carries the failing URL.
    #[error("fetch of {url} failed: {msg}")]
    Fetch { url: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Header of one record: the record line plus one spec per signal.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordHeader {
    /// Record name as declared on the record line (e.g. `"100"`).
    pub name: String,
    /// Number of signals (channels) stored in the record.
    pub n_signal: usize,
    /// Sampling frequency in Hz.
    pub sampling_rate: u32,
    /// Samples per signal.
    pub n_samples: u64,
    /// One entry per signal, in channel order.
    pub signals: Vec<SignalSpec>,
}

/// Description of a single signal, from one header line.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    /// File holding the samples (shared by all signals in this database).
    pub file_name: String,
    /// Storage format code (212 = two 12-bit samples per 3 bytes).
    pub format: u16,
    /// ADC units per millivolt. 0 or absent in the header means
    /// "unspecified" and falls back to the conventional 200.
    pub gain: f64,
    /// ADC resolution in bits.
    pub adc_resolution: u8,
    /// ADC reading corresponding to 0 physical input.
    pub adc_zero: i32,
    /// Sample value corresponding to 0 mV: the parenthesized baseline when
    /// the header carries one, otherwise `adc_zero`. This is the value
    /// subtracted during millivolt conversion.
    pub baseline: i32,
    /// Signal description from the end of the line (e.g. `"MLII"`).
    pub lead_name: String,
}

impl Default for SignalSpec {
    fn default() -> Self {
        SignalSpec {
            file_name: String::new(),
            format: 212,
            gain: 200.0,
            adc_resolution: 12,
            adc_zero: 1024,
            baseline: 1024,
            lead_name: String::new(),
        }
    }
}

/// One annotated heartbeat.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeatAnnotation {
    /// Sample index of the annotated R peak.
    pub sample: u64,
    /// Raw annotation code (1..=49).
    pub code: u8,
    /// Display symbol for the code (e.g. 'N', 'V', '/').
    pub symbol: char,
    /// Five-class grouping of the code.
    pub aami: AamiClass,
}

/// The five conventional beat groups used for coarse evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AamiClass {
    /// Normal and bundle-branch-block beats plus nodal/atrial escapes.
    Normal,
    /// Supraventricular ectopic beats.
    Supraventricular,
    /// Ventricular ectopic beats.
    Ventricular,
    /// Fusion of ventricular and normal.
    Fusion,
    /// Paced, fusion-of-paced, and unclassifiable beats.
    Unknown,
}

impl AamiClass {
    /// All five classes in index order.
    pub const ALL: [AamiClass; 5] = [
        AamiClass::Normal,
        AamiClass::Supraventricular,
        AamiClass::Ventricular,
        AamiClass::Fusion,
        AamiClass::Unknown,
    ];

    /// Stable index 0..=4, usable as a classifier label.
    pub fn index(self) -> usize {
        match self {
            AamiClass::Normal => 0,
            AamiClass::Supraventricular => 1,
            AamiClass::Ventricular => 2,
            AamiClass::Fusion => 3,
            AamiClass::Unknown => 4,
        }
    }

    /// One-letter display label.
    pub fn label(self) -> char {
        match self {
            AamiClass::Normal => 'N',
            AamiClass::Supraventricular => 'S',
            AamiClass::Ventricular => 'V',
            AamiClass::Fusion => 'F',
            AamiClass::Unknown => 'Q',
        }
    }
}

/// Display symbol for an annotation code, if the code is defined.
pub fn symbol_for_code(code: u8) -> Option<char> {
    Some(match code {
        1 => 'N',
        2 => 'L',
        3 => 'R',
        4 => 'a',
        5 => 'V',
        6 => 'F',
        7 => 'J',
        8 => 'A',
        9 => 'S',
        10 => 'E',
        11 => 'j',
        12 => '/',
        13 => 'Q',
        14 => '~',
        16 => '|',
        18 => 's',
        19 => 'T',
        20 => '*',
        21 => 'D',
        22 => '"',
        23 => '=',
        24 => 'p',
        25 => 'B',
        26 => '^',
        27 => 't',
        28 => '+',
        29 => 'u',
        30 => '?',
        31 => '!',
        32 => '[',
        33 => ']',
        34 => 'e',
        35 => 'n',
        36 => '@',
        37 => 'x',
        38 => 'f',
        39 => '(',
        40 => ')',
        41 => 'r',
        _ => return None,
    })
}

/// Annotation code for a display symbol (inverse of [`symbol_for_code`]).
pub fn code_for_symbol(symbol: char) -> Option<u8> {
    (1..=49).find(|&c| symbol_for_code(c) == Some(symbol))
}

/// Whether a code marks a heartbeat (as opposed to rhythm changes, signal
/// quality notes, and other non-beat events).
pub fn is_beat_code(code: u8) -> bool {
    matches!(code, 1..=13 | 25 | 30 | 34 | 35 | 38 | 41)
}

/// Five-class grouping for a beat code; `None` for non-beat codes.
///
/// Groups: N <- {N, L, R, e, j}; S <- {A, a, J, S}; V <- {V, E}; F <- {F};
/// Q <- {/, f, Q}. Beat codes outside those lists (rare) also fall into Q,
/// matching the convention that Q collects whatever cannot be classified.
pub fn aami_class_for_code(code: u8) -> Option<AamiClass> {
    if !is_beat_code(code) {
        return None;
    }
    Some(match code {
        1 | 2 | 3 | 34 | 11 => AamiClass::Normal,
        8 | 4 | 7 | 9 => AamiClass::Supraventricular,
        5 | 10 => AamiClass::Ventricular,
        6 => AamiClass::Fusion,
        _ => AamiClass::Unknown,
    })
}
