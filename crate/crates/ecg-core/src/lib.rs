//! End-to-end ECG heartbeat classification.
//!
//! The crate covers the full path from raw MIT-BIH-style records to per-beat
//! class decisions:
//!
//! - [`wfdb`] — record ingestion: header text, format-212 signal data, and
//!   MIT-format beat annotations, plus record fetching over HTTP
//! - [`qrs`] — Pan & Tompkins style QRS detection on a 200 Hz working rate
//! - [`signature`] — sparse 82x82 time-frequency signatures, one per beat
//! - [`mlp`] — multilayer perceptron classifier trained with momentum SGD
//! - [`noise`] — calibrated additive white Gaussian noise injection
//! - [`eval`] — stratified splits, confusion matrices, error rates, and
//!   SNR sweeps
//! - [`rng`] — the deterministic random generator all of the above draw from
//! - [`synth`] and [`fixtures`] — synthetic ECG records and minimal WFDB
//!   writers, used by the test suites and kept out of production paths
//!
//! All stages are deterministic for a fixed seed: rerunning a pipeline with
//! the same inputs, configuration, and seed reproduces artifacts byte for
//! byte.

pub mod eval;
pub mod fixtures;
pub mod mlp;
pub mod noise;
pub mod qrs;
pub mod rng;
pub mod signature;
pub mod synth;
pub mod wfdb;
