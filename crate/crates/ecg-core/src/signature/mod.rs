//! Sparse time–frequency beat signatures.
//!
//! Each heartbeat — located either by an annotation or by the QRS detector —
//! is summarised as a fixed-size sparse grid built in four steps:
//!
//! 1. **Segment extraction.**  A fixed window of samples (396 by default) is
//!    cut from the millivolt trace, centred on the beat sample.  Positions
//!    that fall outside the record are zero-filled, so beats near the edges
//!    still produce full-length segments.
//! 2. **Short-time Fourier transform.**  The segment is analysed with a
//!    periodic Hann window (length 80, hop 4 by default), keeping the
//!    one-sided spectrum of every frame.
//! 3. **Grid layout.**  Real parts occupy the top rows of a square grid and
//!    imaginary parts the bottom rows, one column per analysis frame; columns
//!    past the last frame stay zero.  The default geometry is 82 × 82.
//! 4. **Sparsification.**  The grid is scaled by its largest absolute value
//!    and only the highest-magnitude cells are kept — 64 by default, which is
//!    under 1 % of the 6 724 grid cells.
//!
//! The result is amplitude-normalised (the strongest cell is always ±1) and
//! cheap to feed through the sparse-aware input layer of the classifier.
//! Collections of encoded beats are persisted in a small binary container;
//! see [`write_dataset`] and [`read_dataset`].

mod container;

pub use container::{
    read_dataset, read_dataset_from, write_dataset, write_dataset_to, ContainerError,
    EncodedBeat, SignatureDataset, SIGNATURE_MAGIC, SIGNATURE_VERSION,
};

use std::f64::consts::PI;

/// Geometry and sparsity settings for the signature encoder.
///
/// The grid dimensions are derived rather than stored: the grid is square
/// with side `2 * (window_len / 2 + 1)`, tall enough to stack the real and
/// imaginary planes of the one-sided spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig {
    /// Samples per beat segment (centred on the beat sample).
    pub segment_len: usize,
    /// Analysis window length in samples.  Must be even and no longer than
    /// the segment.
    pub window_len: usize,
    /// Hop between consecutive analysis frames, in samples.
    pub hop: usize,
    /// Maximum number of grid cells kept per signature.
    pub keep: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            segment_len: 396,
            window_len: 80,
            hop: 4,
            keep: 64,
        }
    }
}

impl EncoderConfig {
    /// Number of one-sided spectrum bins per frame (`window_len / 2 + 1`).
    pub fn bins(&self) -> usize {
        self.window_len / 2 + 1
    }

    /// Number of analysis frames that fit in one segment.
    pub fn frames(&self) -> usize {
        (self.segment_len - self.window_len) / self.hop + 1
    }

    /// Grid height: real rows stacked on imaginary rows.
    pub fn grid_rows(&self) -> usize {
        2 * self.bins()
    }

    /// Grid width.  The grid is kept square; columns past the last frame are
    /// structurally zero.
    pub fn grid_cols(&self) -> usize {
        self.grid_rows()
    }

    /// Total number of grid cells (`grid_rows * grid_cols`).
    pub fn grid_cells(&self) -> usize {
        self.grid_rows() * self.grid_cols()
    }
}

/// One retained grid cell: position plus normalised value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignatureEntry {
    /// Grid row (real rows first, then imaginary rows).
    pub row: u8,
    /// Grid column (analysis frame index).
    pub col: u8,
    /// Cell value after dividing by the grid's largest magnitude; always in
    /// `[-1, 1]` and never zero.
    pub value: f32,
}

/// Sparse representation of one beat: the retained cells in row-major order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseSignature {
    /// Retained cells, sorted by `(row, col)`.
    pub entries: Vec<SignatureEntry>,
}

impl SparseSignature {
    /// True when the source segment was identically zero, which leaves
    /// nothing to normalise and produces an empty signature.
    pub fn is_degenerate(&self) -> bool {
        self.entries.is_empty()
    }

    /// Expands the signature into a dense row-major grid.
    ///
    /// # Panics
    ///
    /// Panics if any entry lies outside the requested grid.
    pub fn to_dense(&self, rows: usize, cols: usize) -> Vec<f64> {
        let mut grid = vec![0.0; rows * cols];
        for entry in &self.entries {
            let (row, col) = (entry.row as usize, entry.col as usize);
            assert!(row < rows && col < cols, "entry outside the grid");
            grid[row * cols + col] = f64::from(entry.value);
        }
        grid
    }

    /// Iterates over `(flat_index, value)` pairs, where the flat index is the
    /// row-major position in a grid that is `grid_cols` wide.  This is the
    /// form consumed by the classifier's sparse input path.
    pub fn indexed(&self, grid_cols: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries
            .iter()
            .map(move |e| (e.row as usize * grid_cols + e.col as usize, f64::from(e.value)))
    }
}

/// Beat-to-signature encoder with precomputed transform tables.
///
/// Building the encoder computes the analysis window and one row of cosine /
/// sine factors per spectrum bin, so encoding a beat is a cache-friendly set
/// of dot products with no trigonometry in the hot path.
#[derive(Debug, Clone)]
pub struct SignatureEncoder {
    config: EncoderConfig,
    /// Windowed cosine factors, `bins x window_len`, row-major.
    wcos: Vec<f64>,
    /// Windowed sine factors, `bins x window_len`, row-major.
    wsin: Vec<f64>,
}

impl SignatureEncoder {
    /// Builds an encoder for the given geometry.
    ///
    /// # Panics
    ///
    /// Panics if the configuration is inconsistent: zero hop, odd or
    /// oversized window, zero `keep`, more frames than grid columns, or a
    /// grid too large for byte-sized cell coordinates.
    pub fn new(config: EncoderConfig) -> Self {
        assert!(config.hop > 0, "hop must be positive");
        assert!(config.keep > 0, "keep must be positive");
        assert!(
            config.window_len > 0 && config.window_len % 2 == 0,
            "window length must be positive and even"
        );
        assert!(
            config.window_len <= config.segment_len,
            "window must fit inside the segment"
        );
        assert!(
            config.frames() <= config.grid_cols(),
            "more analysis frames than grid columns"
        );
        assert!(
            config.grid_rows() <= usize::from(u8::MAX) + 1,
            "cell coordinates are stored as bytes"
        );

        let window = hann_periodic(config.window_len);
        let bins = config.bins();
        let len = config.window_len;
        let mut wcos = vec![0.0; bins * len];
        let mut wsin = vec![0.0; bins * len];
        for k in 0..bins {
            for n in 0..len {
                let angle = 2.0 * PI * (k * n) as f64 / len as f64;
                wcos[k * len + n] = window[n] * angle.cos();
                wsin[k * len + n] = window[n] * angle.sin();
            }
        }
        SignatureEncoder { config, wcos, wsin }
    }

    /// The geometry this encoder was built with.
    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    /// Computes the windowed one-sided spectrum of every frame.
    ///
    /// Returns `(real, imaginary)` matrices indexed `[bin][frame]`.  Exposed
    /// separately from [`encode`](Self::encode) so the transform can be
    /// checked against independent references.
    ///
    /// # Panics
    ///
    /// Panics if the segment length does not match the configuration.
    pub fn stft(&self, segment: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        assert_eq!(
            segment.len(),
            self.config.segment_len,
            "segment length mismatch"
        );
        let bins = self.config.bins();
        let frames = self.config.frames();
        let len = self.config.window_len;
        let mut re = vec![vec![0.0; frames]; bins];
        let mut im = vec![vec![0.0; frames]; bins];
        for m in 0..frames {
            let chunk = &segment[m * self.config.hop..m * self.config.hop + len];
            for k in 0..bins {
                let cos_row = &self.wcos[k * len..(k + 1) * len];
                let sin_row = &self.wsin[k * len..(k + 1) * len];
                let mut acc_re = 0.0;
                let mut acc_im = 0.0;
                for n in 0..len {
                    acc_re += cos_row[n] * chunk[n];
                    acc_im -= sin_row[n] * chunk[n];
                }
                re[k][m] = acc_re;
                im[k][m] = acc_im;
            }
        }
        (re, im)
    }

    /// Encodes one segment into a sparse signature.
    ///
    /// The spectrum is laid out on the grid (real rows, then imaginary rows),
    /// scaled by the largest absolute cell, and reduced to the `keep`
    /// largest-magnitude cells.  Magnitude ties are broken towards the
    /// smaller row-major position so the selection is fully deterministic.
    /// An all-zero segment yields an empty, degenerate signature.
    pub fn encode(&self, segment: &[f64]) -> SparseSignature {
        let (re, im) = self.stft(segment);
        let bins = self.config.bins();
        let grid_cols = self.config.grid_cols();

        let mut max_abs = 0.0f64;
        for row in re.iter().chain(im.iter()) {
            for &v in row {
                max_abs = max_abs.max(v.abs());
            }
        }
        if max_abs == 0.0 {
            return SparseSignature::default();
        }

        // Candidate cells are the nonzero ones; structurally-zero padding
        // columns never appear here.
        let mut candidates: Vec<(usize, f64)> = Vec::new();
        for (k, row) in re.iter().enumerate() {
            for (m, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    candidates.push((k * grid_cols + m, v));
                }
            }
        }
        for (k, row) in im.iter().enumerate() {
            for (m, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    candidates.push(((bins + k) * grid_cols + m, v));
                }
            }
        }

        candidates.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
        candidates.truncate(self.config.keep);
        candidates.sort_by_key(|&(pos, _)| pos);

        let entries = candidates
            .into_iter()
            .filter_map(|(pos, v)| {
                let value = (v / max_abs) as f32;
                // Values this far below the grid maximum underflow the
                // stored precision; dropping them keeps "stored implies
                // nonzero" true.
                (value != 0.0).then_some(SignatureEntry {
                    row: (pos / grid_cols) as u8,
                    col: (pos % grid_cols) as u8,
                    value,
                })
            })
            .collect();
        SparseSignature { entries }
    }

    /// Cuts the segment around `center` out of a millivolt trace and encodes
    /// it.  Convenience wrapper over [`extract_segment`] and
    /// [`encode`](Self::encode).
    pub fn encode_beat(&self, millivolts: &[f64], center: u64) -> SparseSignature {
        let segment = extract_segment(millivolts, center, self.config.segment_len);
        self.encode(&segment)
    }
}

/// Cuts a fixed-length window out of `signal`, centred on `center`.
///
/// The window covers `len / 2` samples before the centre and the remainder
/// after it; positions outside the signal are zero-filled.
pub fn extract_segment(signal: &[f64], center: u64, len: usize) -> Vec<f64> {
    let before = (len / 2) as i64;
    let start = center as i64 - before;
    (0..len as i64)
        .map(|offset| {
            let idx = start + offset;
            if idx >= 0 && (idx as usize) < signal.len() {
                signal[idx as usize]
            } else {
                0.0
            }
        })
        .collect()
}

/// Periodic Hann window: `0.5 * (1 - cos(2 pi n / len))` for `n in 0..len`.
///
/// The periodic form reaches exactly `1.0` at `n = len / 2` for even
/// lengths, so no separate peak normalisation is needed.
fn hann_periodic(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 * (1.0 - (2.0 * PI * n as f64 / len as f64).cos()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::DetRng;
    use proptest::prelude::*;

    #[test]
    fn default_geometry_is_square_with_padding() {
        let config = EncoderConfig::default();
        assert_eq!(config.bins(), 41);
        assert_eq!(config.frames(), 80);
        assert_eq!(config.grid_rows(), 82);
        assert_eq!(config.grid_cols(), 82);
        assert_eq!(config.grid_cells(), 6724);
        // Retained fraction stays under one percent of the grid.
        assert!((config.keep as f64) / (config.grid_cells() as f64) < 0.01);
    }

    #[test]
    fn hann_window_values() {
        let w = hann_periodic(80);
        assert_eq!(w.len(), 80);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[40], 1.0); // cos(pi) is exactly -1
        assert!((w[20] - 0.5).abs() < 1e-15);
        for n in 1..80 {
            assert!(
                (w[n] - w[80 - n]).abs() < 1e-15,
                "window asymmetric at {n}"
            );
        }
    }

    /// Straight-line transform evaluation, written independently of the
    /// encoder: per-element trigonometry, no precomputed tables.
    fn reference_stft(
        segment: &[f64],
        window_len: usize,
        hop: usize,
    ) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let bins = window_len / 2 + 1;
        let frames = (segment.len() - window_len) / hop + 1;
        let mut re = vec![vec![0.0; frames]; bins];
        let mut im = vec![vec![0.0; frames]; bins];
        for k in 0..bins {
            for m in 0..frames {
                let mut acc_re = 0.0;
                let mut acc_im = 0.0;
                for n in 0..window_len {
                    let w = 0.5
                        * (1.0 - (2.0 * std::f64::consts::PI * n as f64 / window_len as f64).cos());
                    let x = w * segment[m * hop + n];
                    let angle =
                        2.0 * std::f64::consts::PI * k as f64 * n as f64 / window_len as f64;
                    acc_re += x * angle.cos();
                    acc_im -= x * angle.sin();
                }
                re[k][m] = acc_re;
                im[k][m] = acc_im;
            }
        }
        (re, im)
    }

    #[test]
    fn stft_matches_independent_reference() {
        let encoder = SignatureEncoder::new(EncoderConfig::default());
        let mut rng = DetRng::new(0x51f7);
        for _ in 0..5 {
            let segment: Vec<f64> = (0..396).map(|_| rng.next_range(-3.0, 3.0)).collect();
            let (re, im) = encoder.stft(&segment);
            let (ref_re, ref_im) = reference_stft(&segment, 80, 4);
            let mut worst = 0.0f64;
            for k in 0..41 {
                for m in 0..80 {
                    worst = worst.max((re[k][m] - ref_re[k][m]).abs());
                    worst = worst.max((im[k][m] - ref_im[k][m]).abs());
                }
            }
            assert!(worst < 1e-9, "transform mismatch: worst diff {worst}");
        }
    }

    #[test]
    fn constant_segment_selects_dc_row_with_positional_ties() {
        // A constant segment concentrates all spectral weight in bin 0, with
        // the same value in every frame.  The 80 equal-magnitude cells tie,
        // and the positional tie-break must keep the first 64 columns.
        let encoder = SignatureEncoder::new(EncoderConfig::default());
        let adu = 1224.0;
        let mv = (adu - 1024.0) / 200.0; // 1.0 mV after calibration
        let segment = vec![mv; 396];
        let sig = encoder.encode(&segment);
        assert_eq!(sig.entries.len(), 64);
        for (i, entry) in sig.entries.iter().enumerate() {
            assert_eq!(entry.row, 0, "entry {i} left the DC row");
            assert_eq!(entry.col, i as u8, "tie-break skipped a column");
            assert_eq!(entry.value, 1.0, "equal cells must normalise to 1");
        }
    }

    #[test]
    fn zero_segment_is_degenerate() {
        let encoder = SignatureEncoder::new(EncoderConfig::default());
        let sig = encoder.encode(&vec![0.0; 396]);
        assert!(sig.is_degenerate());
        assert!(sig.entries.is_empty());
    }

    #[test]
    fn extract_segment_pads_and_centres() {
        let signal: Vec<f64> = (0..100).map(|i| i as f64).collect();
        // Fully interior: a pure slice.
        let seg = extract_segment(&signal, 50, 9);
        assert_eq!(seg, vec![46.0, 47.0, 48.0, 49.0, 50.0, 51.0, 52.0, 53.0, 54.0]);
        // Near the start: two zero-filled samples before index 0.
        let seg = extract_segment(&signal, 2, 9);
        assert_eq!(seg[..2], [0.0, 0.0]);
        assert_eq!(seg[2..], [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        // Near the end: the tail is zero-filled.
        let seg = extract_segment(&signal, 98, 9);
        assert_eq!(seg[..6], [94.0, 95.0, 96.0, 97.0, 98.0, 99.0]);
        assert_eq!(seg[6..], [0.0, 0.0, 0.0]);
        // Centre beyond the record: all padding.
        let seg = extract_segment(&signal, 1000, 9);
        assert!(seg.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dense_and_indexed_agree() {
        let encoder = SignatureEncoder::new(EncoderConfig::default());
        let mut rng = DetRng::new(0xdef1);
        let segment: Vec<f64> = (0..396).map(|_| rng.next_range(-2.0, 2.0)).collect();
        let sig = encoder.encode(&segment);
        let dense = sig.to_dense(82, 82);
        let from_sparse: f64 = sig.indexed(82).map(|(_, v)| v).sum();
        let from_dense: f64 = dense.iter().sum();
        assert!((from_sparse - from_dense).abs() < 1e-12);
        for (idx, v) in sig.indexed(82) {
            assert_eq!(dense[idx], v);
        }
    }

    proptest! {
        #[test]
        fn signature_invariants_hold(values in proptest::collection::vec(-10.0f64..10.0, 396)) {
            let encoder = SignatureEncoder::new(EncoderConfig::default());
            let sig = encoder.encode(&values);
            prop_assert!(sig.entries.len() <= 64);
            if !sig.is_degenerate() {
                // The strongest cell always survives selection and scales to
                // exactly +/-1.
                let max = sig
                    .entries
                    .iter()
                    .map(|e| e.value.abs())
                    .fold(0.0f32, f32::max);
                prop_assert_eq!(max, 1.0);
            }
            let mut last_pos = None;
            for entry in &sig.entries {
                prop_assert!(entry.value != 0.0);
                prop_assert!(entry.value.abs() <= 1.0);
                prop_assert!((entry.row as usize) < 82);
                // Padding columns are structurally zero, so nothing may be
                // stored there.
                prop_assert!((entry.col as usize) < 80);
                let pos = entry.row as usize * 82 + entry.col as usize;
                prop_assert!(last_pos.map_or(true, |p| pos > p), "entries out of order");
                last_pos = Some(pos);
            }
        }
    }

    /// Fraction of retained cell positions shared by two signatures.
    fn overlap(a: &SparseSignature, b: &SparseSignature) -> f64 {
        let pos = |s: &SparseSignature| {
            s.entries
                .iter()
                .map(|e| (e.row, e.col))
                .collect::<std::collections::HashSet<_>>()
        };
        let (sa, sb) = (pos(a), pos(b));
        let denom = sa.len().max(sb.len()).max(1);
        sa.intersection(&sb).count() as f64 / denom as f64
    }

    #[test]
    fn small_centre_shift_keeps_most_cells() {
        // Beat alignment from the detector can be off by a sample or two;
        // the retained-cell pattern must not fall apart when that happens.
        let config = crate::synth::fixture_config("100").unwrap();
        let record = crate::synth::generate(&crate::synth::SynthConfig {
            duration_s: 120.0,
            ..config
        });
        let mv: Vec<f64> = record.channels[0]
            .iter()
            .map(|&s| (s as f64 - 1024.0) / 200.0)
            .collect();
        let encoder = SignatureEncoder::new(EncoderConfig::default());
        let beats: Vec<u64> = record
            .annotations
            .iter()
            .map(|&(s, _)| s)
            .skip(5)
            .take(40)
            .collect();
        let mut total = 0.0;
        for &beat in &beats {
            let a = encoder.encode_beat(&mv, beat);
            let b = encoder.encode_beat(&mv, beat + 2);
            total += overlap(&a, &b);
        }
        let mean = total / beats.len() as f64;
        assert!(mean >= 0.70, "mean overlap {mean:.3} under 2-sample shift");
    }

    #[test]
    fn same_class_beats_overlap_more_than_cross_class() {
        // Signatures only earn their keep if beats of one morphology look
        // more alike than beats of different morphologies.
        let config = crate::synth::fixture_config("208").unwrap();
        let record = crate::synth::generate(&crate::synth::SynthConfig {
            duration_s: 240.0,
            ..config
        });
        let mv: Vec<f64> = record.channels[0]
            .iter()
            .map(|&s| (s as f64 - 1024.0) / 200.0)
            .collect();
        let encoder = SignatureEncoder::new(EncoderConfig::default());
        let take_class = |code: u8, count: usize| -> Vec<SparseSignature> {
            record
                .annotations
                .iter()
                .filter(|&&(_, c)| c == code)
                .take(count)
                .map(|&(s, _)| encoder.encode_beat(&mv, s))
                .collect()
        };
        let normals = take_class(1, 30);
        let ventriculars = take_class(5, 30);
        assert!(normals.len() >= 10 && ventriculars.len() >= 10);

        let mean_pairwise = |xs: &[SparseSignature], ys: &[SparseSignature], same: bool| {
            let mut total = 0.0;
            let mut count = 0usize;
            for (i, a) in xs.iter().enumerate() {
                for (j, b) in ys.iter().enumerate() {
                    if same && i >= j {
                        continue;
                    }
                    total += overlap(a, b);
                    count += 1;
                }
            }
            total / count as f64
        };
        let within_n = mean_pairwise(&normals, &normals, true);
        let within_v = mean_pairwise(&ventriculars, &ventriculars, true);
        let cross = mean_pairwise(&normals, &ventriculars, false);
        assert!(
            within_n > cross && within_v > cross,
            "within-class overlap (N {within_n:.3}, V {within_v:.3}) \
             must exceed cross-class overlap ({cross:.3})"
        );
    }
}
