//! Scoring detections against reference annotations.

use super::Detection;

/// Outcome of matching a detection list against reference beat positions.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    /// `(detection index, annotation index)` pairs, in increasing order.
    pub pairs: Vec<(usize, usize)>,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl MatchReport {
    /// Fraction of reference beats that were detected. 1.0 when there are
    /// no reference beats (nothing was missed).
    pub fn sensitivity(&self) -> f64 {
        ratio(self.true_positives, self.true_positives + self.false_negatives)
    }

    /// Fraction of detections that correspond to a reference beat. 1.0
    /// when there are no detections (nothing was spurious).
    pub fn positive_predictivity(&self) -> f64 {
        ratio(self.true_positives, self.true_positives + self.false_positives)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Greedily pairs detections with reference samples in time order: two
/// sorted cursors advance together, pairing when within `tolerance_ms` and
/// otherwise dropping whichever event is earlier. Each detection and each
/// reference matches at most once.
pub fn match_detections(
    detections: &[Detection],
    reference: &[u64],
    tolerance_ms: f64,
    fs: u32,
) -> MatchReport {
    let tol = (tolerance_ms / 1000.0 * fs as f64).round() as u64;
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    while i < detections.len() && j < reference.len() {
        let d = detections[i].sample;
        let r = reference[j];
        if d.abs_diff(r) <= tol {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if d < r {
            i += 1;
        } else {
            j += 1;
        }
    }
    let tp = pairs.len();
    MatchReport {
        true_positives: tp,
        false_positives: detections.len() - tp,
        false_negatives: reference.len() - tp,
        pairs,
    }
}
