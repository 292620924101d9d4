//! QRS detection, after Pan & Tompkins.
//!
//! The detector resamples the input to a 200 Hz working rate and runs the
//! classic five-stage chain — band-pass (cascaded low/high pass with
//! integer coefficients), five-point derivative, squaring, and a 150 ms
//! moving-window integral — then walks the integrated peaks with adaptive
//! signal/noise thresholds, a 200 ms refractory period, and an RR-gap
//! search-back pass at a lowered threshold. Peak positions are corrected
//! for the cumulative filter group delay and refined against the band-passed
//! waveform before being mapped back to the native sampling rate.
//!
//! Detection is invariant to the input's scale and constant offset (up to
//! floating-point rounding on exactly-borderline threshold comparisons), so
//! callers may feed raw ADC units or millivolts interchangeably.

mod detector;
mod matching;
pub mod stages;

pub use detector::{detect_qrs, detect_qrs_record, Detection, DetectorConfig};
pub use matching::{match_detections, MatchReport};

/// Errors from the detector front end.
#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum QrsError {
    #[error("empty input signal")]
    EmptyInput,
    /// Shorter than the threshold learning phase.
    #[error("record too short: {got} samples, need at least {needed}")]
    TooShort { needed: usize, got: usize },
}
