//! Artifact writing: JSON reports, CSV tables, and the model metadata
//! sidecar.
//!
//! Everything written here is deterministic for a fixed configuration and
//! seed: struct fields serialize in declaration order, floats print either
//! via their shortest round-trip form (JSON) or at a pinned precision
//! (CSV), and nothing time- or path-dependent is ever included.  Timings
//! are diagnostics and belong on stderr.

use std::path::{Path, PathBuf};

use ecg_core::eval::{FalseRates, LabelSpace, PatientScore};
use ecg_core::mlp::{EpochStats, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::{CliError, Stage};

/// Ties an artifact to the run that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStamp {
    /// Hex SHA-256 of the resolved semantic settings.
    pub config_hash: String,
    /// The seed every random choice derived from.
    pub seed: u64,
}

/// One epoch of training telemetry, minus wall time (which would break
/// artifact determinism).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRow {
    pub epoch: usize,
    pub mean_loss: f64,
    pub train_accuracy: f64,
}

impl From<&EpochStats> for EpochRow {
    fn from(stats: &EpochStats) -> EpochRow {
        EpochRow {
            epoch: stats.epoch,
            mean_loss: stats.mean_loss,
            train_accuracy: stats.train_accuracy,
        }
    }
}

/// Metadata sidecar written next to every trained model.
///
/// The label space travels with the model so that downstream commands
/// interpret its outputs exactly as training did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub stamp: RunStamp,
    /// Layer widths, input first.
    pub dims: Vec<usize>,
    /// Label-space mode the model was trained under: 5 (beat families) or
    /// 23 (per-symbol).
    pub classes: usize,
    /// The class vocabulary the output layer indexes into.
    pub label_space: LabelSpace,
    /// Hyper-parameters the model was trained with.
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: Vec<EpochRow>,
}

impl ModelMeta {
    pub fn new(
        stamp: RunStamp,
        dims: Vec<usize>,
        classes: usize,
        label_space: LabelSpace,
        train: &TrainConfig,
        stats: &[EpochStats],
    ) -> ModelMeta {
        ModelMeta {
            stamp,
            dims,
            classes,
            label_space,
            learning_rate: train.learning_rate,
            momentum: train.momentum,
            batch_size: train.batch_size,
            epochs: stats.iter().map(EpochRow::from).collect(),
        }
    }

    /// Short tag naming the label-space mode in reports: `aami5` or
    /// `fine23`.
    pub fn space_tag(&self) -> String {
        space_tag(self.classes)
    }
}

/// Report tag for a label-space mode.
pub fn space_tag(classes: usize) -> String {
    if classes == 5 {
        "aami5".to_string()
    } else {
        format!("fine{classes}")
    }
}

/// Path of the metadata sidecar for a model file: `<model>.json`.
pub fn sidecar_path(model: &Path) -> PathBuf {
    let mut name = model.file_name().unwrap_or_default().to_os_string();
    name.push(".json");
    model.with_file_name(name)
}

/// Writes a model's metadata sidecar.
pub fn write_sidecar(model: &Path, meta: &ModelMeta) -> Result<(), CliError> {
    write_json(&sidecar_path(model), meta, Stage::Train)
}

/// Reads the metadata sidecar next to a model file.
pub fn read_sidecar(model: &Path, stage: Stage) -> Result<ModelMeta, CliError> {
    let path = sidecar_path(model);
    let text = std::fs::read_to_string(&path).map_err(|e| {
        CliError::new(
            stage,
            format!(
                "cannot read model metadata {}: {e} (the train command writes it next to the model)",
                path.display()
            ),
        )
    })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::new(stage, format!("model metadata {}: {e}", path.display())))
}

/// Serializes a report struct as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T, stage: Stage) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::new(stage, format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text, stage)
}

/// Writes a text artifact, creating parent directories as needed.
pub fn write_text(path: &Path, content: &str, stage: Stage) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::new(stage, format!("creating {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, content)
        .map_err(|e| CliError::new(stage, format!("writing {}: {e}", path.display())))
}

/// Fixed-precision float for CSV cells: six decimals, enough to compare
/// accuracies without dragging binary noise into text diffs.
pub fn csv_f64(value: f64) -> String {
    format!("{value:.6}")
}

/// CSV cell for a possibly-undefined ratio; absent classes print empty.
pub fn csv_opt(value: Option<f64>) -> String {
    value.map(csv_f64).unwrap_or_default()
}

/// Per-class accuracy table (`per_class.csv`).
///
/// One row per class and label space: `space,class,count,accuracy`, where
/// `count` is the number of test beats whose true class it is and accuracy
/// is empty for classes absent from the test set.
pub fn per_class_csv(sections: &[SpaceResult]) -> String {
    let mut out = String::from("space,class,count,accuracy\n");
    for section in sections {
        for (index, name) in section.class_names.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                section.space, name, section.class_counts[index],
                csv_opt(section.per_class[index]),
            ));
        }
    }
    out
}

/// One-row-per-space summary table (`summary.csv`).
pub fn summary_csv(sections: &[SpaceResult]) -> String {
    let mut out = String::from(
        "space,beats,overall_accuracy,patient_avg_accuracy,\
         false_positive_rate,false_negative_rate,missed_abnormal_rate\n",
    );
    for s in sections {
        let (fp, fnr, missed) = match &s.rates {
            Some(r) => (
                csv_f64(r.false_positive_rate),
                csv_f64(r.false_negative_rate),
                csv_f64(r.missed_abnormal_rate),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{fp},{fnr},{missed}\n",
            s.space,
            s.beats,
            csv_f64(s.overall_accuracy),
            csv_f64(s.patient_avg_accuracy),
        ));
    }
    out
}

/// Everything the evaluation of one model on one test set produced.
///
/// This is both a section of `report.json` and the source for the CSV
/// tables, so the numbers in all artifacts agree by construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceResult {
    /// Space tag: `aami5` or `fine23`.
    pub space: String,
    pub class_names: Vec<String>,
    /// Test beats evaluated.
    pub beats: usize,
    pub overall_accuracy: f64,
    /// Unweighted mean of per-record accuracies.
    pub patient_avg_accuracy: f64,
    /// True-class beat counts, indexed like `class_names`.
    pub class_counts: Vec<u64>,
    /// Per-class accuracy; `None` where the test set has no such beats.
    pub per_class: Vec<Option<f64>>,
    /// Normal-centric error rates; `None` for spaces without a normal
    /// class.
    pub rates: Option<FalseRates>,
    pub per_patient: Vec<PatientScore>,
}
