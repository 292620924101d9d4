//! Classifier evaluation: label spaces, stratified splits, confusion
//! matrices, clinically-oriented error rates, per-patient grouping, and
//! noise-robustness sweeps.
//!
//! Two label granularities are supported.  The *fine-grained* space gives
//! every observed annotation code its own class (capped, with rare codes
//! folded into a catch-all bucket); the *five-class* space groups beats into
//! the standard N / S / V / F / Q families.  Both are built once per corpus
//! and then shared by training, evaluation, and reporting so class indices
//! mean the same thing everywhere.
//!
//! Besides plain accuracy, [`FalseRates`] captures the two error directions
//! that matter clinically: healthy beats flagged as disease (false alarms)
//! and diseased beats not recognised as their condition (false negatives).

mod split;
mod sweep;

pub use split::{stratified_split, SplitIndices};
pub use sweep::{noise_sweep, SweepConfig, SweepPoint};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mlp::{MlpError, MlpModel};
use crate::qrs::QrsError;
use crate::signature::SignatureDataset;
use crate::wfdb::{aami_class_for_code, symbol_for_code, AamiClass};

/// Annotation code for a normal beat.
const NORMAL_CODE: u8 = 1;

/// Annotation code for an unclassifiable beat; its class doubles as the
/// fallback bucket when present.
const UNCLASSIFIABLE_CODE: u8 = 13;

/// Failures from evaluation plumbing.
#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    /// An operation that needs at least one example got none.
    #[error("no examples to work with")]
    Empty,

    /// Actual and predicted label lists must pair up.
    #[error("{actual} actual labels but {predicted} predictions")]
    LengthMismatch { actual: usize, predicted: usize },

    /// A class index fell outside the label space.
    #[error("class index {index} outside {classes} classes")]
    ClassOutOfRange { index: usize, classes: usize },

    /// The requested training-set size cannot be satisfied.
    #[error("training size {requested} exceeds example count {available}")]
    SplitTooLarge { requested: usize, available: usize },

    /// Training sets must be non-empty.
    #[error("training size must be positive")]
    ZeroSplit,

    /// A fine-grained label space needs room for at least one real class
    /// plus the catch-all bucket.
    #[error("class cap {0} is too small")]
    CapTooSmall(usize),

    /// The record does not have the requested channel.
    #[error("record has no channel {0}")]
    BadChannel(usize),

    /// The classifier's input width does not match the signature grid.
    #[error("classifier expects {model} inputs but signatures have {dataset}")]
    WidthMismatch { model: usize, dataset: usize },

    /// Forwarded classifier failure.
    #[error("classifier error: {0}")]
    Mlp(#[from] MlpError),

    /// Forwarded detector failure.
    #[error("detector error: {0}")]
    Qrs(#[from] QrsError),
}

/// A fixed mapping from raw annotation codes to contiguous class indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSpace {
    /// Display name per class index.
    names: Vec<String>,
    /// Exact code-to-class assignments.
    map: BTreeMap<u8, usize>,
    /// Class index for codes outside `map`.
    fallback: usize,
    /// Class index holding normal beats, when the space has one.
    normal: Option<usize>,
}

impl LabelSpace {
    /// The five-class N / S / V / F / Q space.  Codes with no five-class
    /// family (which never occurs for beat codes) fall into Q.
    pub fn aami() -> LabelSpace {
        let names = AamiClass::ALL
            .iter()
            .map(|c| c.label().to_string())
            .collect();
        LabelSpace {
            names,
            map: BTreeMap::new(),
            fallback: AamiClass::Unknown.index(),
            normal: Some(AamiClass::Normal.index()),
        }
    }

    /// Builds a fine-grained space from the annotation codes observed in a
    /// corpus.
    ///
    /// Distinct codes are ranked by frequency (descending), with ties broken
    /// by display symbol (ascending), and each becomes its own class.  When
    /// more than `cap` distinct codes are observed, the `cap - 1` most
    /// frequent keep their own classes and the rest share a catch-all bucket
    /// named `other`.
    ///
    /// Codes never observed fall back to, in order of preference: the
    /// overflow bucket, the class of the unclassifiable-beat code when it
    /// was observed, or the last class.
    pub fn fine_grained(observed_codes: &[u8], cap: usize) -> Result<LabelSpace, EvalError> {
        if observed_codes.is_empty() {
            return Err(EvalError::Empty);
        }
        if cap < 2 {
            return Err(EvalError::CapTooSmall(cap));
        }
        let mut counts: BTreeMap<u8, u64> = BTreeMap::new();
        for &code in observed_codes {
            *counts.entry(code).or_insert(0) += 1;
        }
        let mut ranked: Vec<(u8, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| {
            b.1.cmp(&a.1)
                .then_with(|| symbol_key(a.0).cmp(&symbol_key(b.0)))
                .then_with(|| a.0.cmp(&b.0))
        });

        let mut names: Vec<String>;
        let mut map = BTreeMap::new();
        let fallback;
        if ranked.len() > cap {
            let kept = cap - 1;
            names = ranked[..kept]
                .iter()
                .map(|&(code, _)| display_name(code))
                .collect();
            names.push("other".to_string());
            for (i, &(code, _)) in ranked[..kept].iter().enumerate() {
                map.insert(code, i);
            }
            for &(code, _) in &ranked[kept..] {
                map.insert(code, kept);
            }
            fallback = kept;
        } else {
            names = ranked.iter().map(|&(code, _)| display_name(code)).collect();
            for (i, &(code, _)) in ranked.iter().enumerate() {
                map.insert(code, i);
            }
            fallback = map
                .get(&UNCLASSIFIABLE_CODE)
                .copied()
                .unwrap_or(names.len() - 1);
        }
        let normal = map.get(&NORMAL_CODE).copied();
        Ok(LabelSpace {
            names,
            map,
            fallback,
            normal,
        })
    }

    /// Number of classes.
    pub fn class_count(&self) -> usize {
        self.names.len()
    }

    /// Display name of one class.
    pub fn name(&self, class: usize) -> &str {
        &self.names[class]
    }

    /// Display names of every class, in index order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Class index for an annotation code.  Total: codes outside the space
    /// land in the documented fallback class.
    pub fn class_of(&self, code: u8) -> usize {
        if let Some(&class) = self.map.get(&code) {
            return class;
        }
        if self.map.is_empty() {
            // Five-class space: grouping is rule-based, not observational.
            return aami_class_for_code(code).map_or(self.fallback, |c| c.index());
        }
        self.fallback
    }

    /// The class holding normal beats, when the space has one.
    pub fn normal_class(&self) -> Option<usize> {
        self.normal
    }

    /// The annotation code a class stands for, when the mapping is
    /// one-to-one.  `None` for catch-all buckets (several codes share the
    /// class) and for rule-based spaces, which assign no explicit codes.
    pub fn code_of_class(&self, class: usize) -> Option<u8> {
        let mut codes = self.map.iter().filter(|&(_, &c)| c == class);
        match (codes.next(), codes.next()) {
            (Some((&code, _)), None) => Some(code),
            _ => None,
        }
    }
}

/// Sort key for ranking ties: display symbol, ascending.
fn symbol_key(code: u8) -> u32 {
    symbol_for_code(code).map_or(u32::MAX, |c| c as u32)
}

/// Class name for one code: its display symbol, or the numeric code for the
/// (unexpected) case of a code without one.
fn display_name(code: u8) -> String {
    symbol_for_code(code).map_or_else(|| format!("code{code}"), |c| c.to_string())
}

/// Square contingency table; rows are actual classes, columns predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    /// An all-zero matrix over `classes` classes.
    pub fn new(classes: usize) -> ConfusionMatrix {
        ConfusionMatrix {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    /// Number of classes on each axis.
    pub fn class_count(&self) -> usize {
        self.classes
    }

    /// Adds one observation.
    ///
    /// # Panics
    ///
    /// Panics if either index is outside the matrix; callers validate
    /// labels before recording.
    pub fn record(&mut self, actual: usize, predicted: usize) {
        assert!(actual < self.classes && predicted < self.classes);
        self.counts[actual * self.classes + predicted] += 1;
    }

    /// Observations with the given actual and predicted classes.
    pub fn count(&self, actual: usize, predicted: usize) -> u64 {
        self.counts[actual * self.classes + predicted]
    }

    /// Observations whose actual class is `actual`.
    pub fn row_total(&self, actual: usize) -> u64 {
        self.counts[actual * self.classes..(actual + 1) * self.classes]
            .iter()
            .sum()
    }

    /// Total observations.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Correctly-classified observations (the diagonal).
    pub fn correct(&self) -> u64 {
        (0..self.classes).map(|c| self.count(c, c)).sum()
    }

    /// Fraction correct overall; `0.0` for an empty matrix.
    pub fn overall_accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.correct() as f64 / total as f64
        }
    }

    /// Fraction correct per actual class; `None` where the class never
    /// occurred.
    pub fn per_class_accuracy(&self) -> Vec<Option<f64>> {
        (0..self.classes)
            .map(|c| {
                let row = self.row_total(c);
                (row > 0).then(|| self.count(c, c) as f64 / row as f64)
            })
            .collect()
    }
}

/// Error rates oriented around a designated normal class.
///
/// All three are fractions in `[0, 1]`; empty denominators yield `0.0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FalseRates {
    /// False alarms: fraction of truly-normal beats predicted as anything
    /// other than normal.
    pub false_positive_rate: f64,
    /// False negatives: fraction of truly-abnormal beats predicted as any
    /// class other than their own — a beat counts as missed even when it is
    /// confused with a *different* abnormality.
    pub false_negative_rate: f64,
    /// The subset of false negatives predicted as outright normal.
    pub missed_abnormal_rate: f64,
}

/// Computes [`FalseRates`] from a confusion matrix and the index of the
/// normal class.
pub fn false_rates(matrix: &ConfusionMatrix, normal_class: usize) -> FalseRates {
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let normal_total = matrix.row_total(normal_class);
    let false_alarms = normal_total - matrix.count(normal_class, normal_class);

    let mut abnormal_total = 0;
    let mut abnormal_wrong = 0;
    let mut abnormal_as_normal = 0;
    for actual in 0..matrix.class_count() {
        if actual == normal_class {
            continue;
        }
        let row = matrix.row_total(actual);
        abnormal_total += row;
        abnormal_wrong += row - matrix.count(actual, actual);
        abnormal_as_normal += matrix.count(actual, normal_class);
    }
    FalseRates {
        false_positive_rate: ratio(false_alarms, normal_total),
        false_negative_rate: ratio(abnormal_wrong, abnormal_total),
        missed_abnormal_rate: ratio(abnormal_as_normal, abnormal_total),
    }
}

/// Everything measured in one evaluation pass.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome {
    /// The full contingency table.
    pub confusion: ConfusionMatrix,
    /// Fraction of beats classified correctly.
    pub overall_accuracy: f64,
    /// Per-class accuracy; `None` for classes absent from the actuals.
    pub per_class: Vec<Option<f64>>,
    /// Normal-centric error rates; `None` when the space has no normal
    /// class.
    pub rates: Option<FalseRates>,
}

/// Scores predictions against ground truth over a fixed label space.
pub fn evaluate_predictions(
    actual: &[usize],
    predicted: &[usize],
    classes: usize,
    normal_class: Option<usize>,
) -> Result<EvalOutcome, EvalError> {
    if actual.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(EvalError::Empty);
    }
    for &index in actual.iter().chain(predicted) {
        if index >= classes {
            return Err(EvalError::ClassOutOfRange { index, classes });
        }
    }
    let mut confusion = ConfusionMatrix::new(classes);
    for (&a, &p) in actual.iter().zip(predicted) {
        confusion.record(a, p);
    }
    let rates = normal_class.map(|n| false_rates(&confusion, n));
    Ok(EvalOutcome {
        overall_accuracy: confusion.overall_accuracy(),
        per_class: confusion.per_class_accuracy(),
        rates,
        confusion,
    })
}

/// Accuracy bookkeeping for one source record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PatientScore {
    /// Numeric record name the beats came from.
    pub record_id: u16,
    /// Beats evaluated from this record.
    pub total: usize,
    /// Beats classified correctly.
    pub correct: usize,
}

impl PatientScore {
    /// Fraction correct for this record.
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

/// Groups per-beat results by source record, sorted by record id.
pub fn per_patient_scores(
    record_ids: &[u16],
    actual: &[usize],
    predicted: &[usize],
) -> Result<Vec<PatientScore>, EvalError> {
    if record_ids.len() != actual.len() || actual.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    let mut by_record: BTreeMap<u16, (usize, usize)> = BTreeMap::new();
    for ((&id, &a), &p) in record_ids.iter().zip(actual).zip(predicted) {
        let slot = by_record.entry(id).or_insert((0, 0));
        slot.0 += 1;
        if a == p {
            slot.1 += 1;
        }
    }
    Ok(by_record
        .into_iter()
        .map(|(record_id, (total, correct))| PatientScore {
            record_id,
            total,
            correct,
        })
        .collect())
}

/// Unweighted mean of per-record accuracies: every patient counts equally,
/// however many beats they contributed.  `0.0` when empty.
pub fn mean_patient_accuracy(scores: &[PatientScore]) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    scores.iter().map(PatientScore::accuracy).sum::<f64>() / scores.len() as f64
}

/// True class index for every beat in a collection, in beat order.
pub fn true_classes(dataset: &SignatureDataset, space: &LabelSpace) -> Vec<usize> {
    dataset
        .beats
        .iter()
        .map(|b| space.class_of(b.label))
        .collect()
}

/// Runs the classifier over the selected beats of a collection.
///
/// `indices` refer to `dataset.beats`; out-of-range indices panic, as they
/// can only come from a bug in split bookkeeping.
pub fn classify_beats(
    model: &MlpModel,
    dataset: &SignatureDataset,
    indices: &[usize],
) -> Result<Vec<usize>, EvalError> {
    if model.input_len() != dataset.input_len() {
        return Err(EvalError::WidthMismatch {
            model: model.input_len(),
            dataset: dataset.input_len(),
        });
    }
    let cols = dataset.grid_cols as usize;
    let mut predictions = Vec::with_capacity(indices.len());
    for &i in indices {
        let input: Vec<(usize, f64)> = dataset.beats[i].signature.indexed(cols).collect();
        predictions.push(model.predict_sparse(&input)?.0);
    }
    Ok(predictions)
}
