//! `eval`: score a trained model against an encoded beat file.

use std::path::Path;

use ecg_core::eval::{
    classify_beats, evaluate_predictions, mean_patient_accuracy, per_patient_scores, true_classes,
    LabelSpace,
};
use ecg_core::mlp::{load_model_from, MlpModel};
use ecg_core::signature::{read_dataset_from, SignatureDataset};
use serde::Serialize;

use crate::args::EvalArgs;
use crate::config::{config_hash, sha256_hex, Context};
use crate::report::{self, ModelMeta, RunStamp, SpaceResult};
use crate::{CliError, Stage};

#[derive(Serialize)]
struct Settings {
    command: &'static str,
    model_sha256: String,
    input_sha256: String,
}

/// `report.json` payload for a standalone evaluation.
#[derive(Serialize)]
struct EvalReport<'a> {
    stamp: RunStamp,
    /// Stamp of the run that trained the model, from its sidecar.
    model_stamp: &'a RunStamp,
    beats: usize,
    results: &'a [SpaceResult],
}

pub fn run(ctx: &Context, args: &EvalArgs) -> Result<(), CliError> {
    let stage = Stage::Eval;
    let (model, meta, model_bytes_sha) = load_model_with_meta(&args.model, stage)?;
    let input_bytes = std::fs::read(&args.input)
        .map_err(|e| CliError::new(stage, format!("reading {}: {e}", args.input.display())))?;
    let dataset = read_dataset_from(&mut input_bytes.as_slice())
        .map_err(|e| CliError::new(stage, format!("{}: {e}", args.input.display())))?;

    let indices: Vec<usize> = (0..dataset.beats.len()).collect();
    let result = score(&model, &meta, &dataset, &indices).map_err(CliError::at(stage))?;

    let stamp = RunStamp {
        config_hash: config_hash(&Settings {
            command: "eval",
            model_sha256: model_bytes_sha,
            input_sha256: sha256_hex(&input_bytes),
        }),
        seed: ctx.seed,
    };
    let results = [result];
    let payload = EvalReport {
        stamp,
        model_stamp: &meta.stamp,
        beats: dataset.beats.len(),
        results: &results,
    };
    report::write_json(&args.report_dir.join("report.json"), &payload, stage)?;
    report::write_text(
        &args.report_dir.join("per_class.csv"),
        &report::per_class_csv(&results),
        stage,
    )?;
    let summary = report::summary_csv(&results);
    report::write_text(&args.report_dir.join("summary.csv"), &summary, stage)?;
    eprintln!("eval: reports in {}", args.report_dir.display());
    print!("{summary}");
    Ok(())
}

/// Loads a model plus its sidecar, returning the model file's content hash
/// for stamping.
pub fn load_model_with_meta(
    path: &Path,
    stage: Stage,
) -> Result<(MlpModel, ModelMeta, String), CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::new(stage, format!("reading {}: {e}", path.display())))?;
    let model = load_model_from(&mut bytes.as_slice())
        .map_err(|e| CliError::new(stage, format!("{}: {e}", path.display())))?;
    let meta = report::read_sidecar(path, stage)?;
    if meta.dims != model.dims() {
        return Err(CliError::new(
            stage,
            format!(
                "model {} has dims {:?} but its sidecar says {:?}",
                path.display(),
                model.dims(),
                meta.dims
            ),
        ));
    }
    Ok((model, meta, sha256_hex(&bytes)))
}

/// Classifies the selected beats and assembles the full result section.
pub fn score(
    model: &MlpModel,
    meta: &ModelMeta,
    dataset: &SignatureDataset,
    indices: &[usize],
) -> Result<SpaceResult, String> {
    let space: &LabelSpace = &meta.label_space;
    if indices.is_empty() {
        return Err("no beats to evaluate".to_string());
    }
    let predicted = classify_beats(model, dataset, indices).map_err(|e| e.to_string())?;
    let all_actual = true_classes(dataset, space);
    let actual: Vec<usize> = indices.iter().map(|&i| all_actual[i]).collect();
    let record_ids: Vec<u16> = indices.iter().map(|&i| dataset.beats[i].record_id).collect();

    let outcome =
        evaluate_predictions(&actual, &predicted, space.class_count(), space.normal_class())
            .map_err(|e| e.to_string())?;
    let per_patient =
        per_patient_scores(&record_ids, &actual, &predicted).map_err(|e| e.to_string())?;
    let class_counts: Vec<u64> =
        (0..space.class_count()).map(|c| outcome.confusion.row_total(c)).collect();

    Ok(SpaceResult {
        space: meta.space_tag(),
        class_names: space.names().to_vec(),
        beats: indices.len(),
        overall_accuracy: outcome.overall_accuracy,
        patient_avg_accuracy: mean_patient_accuracy(&per_patient),
        class_counts,
        per_class: outcome.per_class,
        rates: outcome.rates,
        per_patient,
    })
}
