//! `train`: fit a classifier to an encoded beat file.
//!
//! The label space is built here — five beat families, or per-symbol
//! classes capped at 23 — and persisted in the model's metadata sidecar so
//! every downstream command interprets the output layer identically.

use std::time::Instant;

use ecg_core::eval::{true_classes, LabelSpace};
use ecg_core::mlp::{save_model, MlpModel, SparseVector, TrainConfig};
use ecg_core::rng::DetRng;
use ecg_core::signature::{read_dataset_from, SignatureDataset};
use serde::Serialize;

use crate::args::TrainArgs;
use crate::config::{config_hash, parse_hidden, sha256_hex, Context};
use crate::report::{ModelMeta, RunStamp};
use crate::{report, CliError, Stage};

#[derive(Serialize)]
struct Settings {
    command: &'static str,
    /// Content hash of the training file, so the stamp changes when the
    /// data does even though the path is not semantic.
    input_sha256: String,
    classes: usize,
    hidden: Vec<usize>,
    epochs: usize,
    learning_rate: f64,
    momentum: f64,
    batch_size: usize,
    seed: u64,
}

/// Everything `train` resolved and produced, for reuse by `pipeline`.
pub struct Trained {
    pub model: MlpModel,
    pub meta: ModelMeta,
}

pub fn run(ctx: &Context, args: &TrainArgs) -> Result<(), CliError> {
    let stage = Stage::Train;
    let bytes = std::fs::read(&args.input)
        .map_err(|e| CliError::new(stage, format!("reading {}: {e}", args.input.display())))?;
    let dataset = read_dataset_from(&mut bytes.as_slice())
        .map_err(|e| CliError::new(stage, format!("{}: {e}", args.input.display())))?;

    let classes: usize = ctx.setting(args.classes, "classes", 5).map_err(CliError::at(stage))?;
    let hidden_text: String =
        ctx.setting(args.hidden.clone(), "hidden", "256".to_string()).map_err(CliError::at(stage))?;
    let hidden = parse_hidden(&hidden_text).map_err(CliError::at(stage))?;
    let train_config = TrainConfig {
        learning_rate: ctx.setting(args.lr, "lr", 0.1).map_err(CliError::at(stage))?,
        momentum: ctx.setting(args.momentum, "momentum", 0.9).map_err(CliError::at(stage))?,
        batch_size: ctx.setting(args.batch, "batch", 32).map_err(CliError::at(stage))?,
        epochs: ctx.setting(args.epochs, "epochs", 10).map_err(CliError::at(stage))?,
    };

    let stamp = RunStamp {
        config_hash: config_hash(&Settings {
            command: "train",
            input_sha256: sha256_hex(&bytes),
            classes,
            hidden: hidden.clone(),
            epochs: train_config.epochs,
            learning_rate: train_config.learning_rate,
            momentum: train_config.momentum,
            batch_size: train_config.batch_size,
            seed: ctx.seed,
        }),
        seed: ctx.seed,
    };

    let space = build_space(&dataset, classes).map_err(CliError::at(stage))?;
    let indices: Vec<usize> = (0..dataset.beats.len()).collect();
    let trained = fit(&dataset, &indices, &space, classes, &hidden, &train_config, stamp, ctx.seed)
        .map_err(CliError::at(stage))?;

    save_model(&args.model_out, &trained.model)
        .map_err(|e| CliError::new(stage, format!("writing {}: {e}", args.model_out.display())))?;
    report::write_sidecar(&args.model_out, &trained.meta)?;
    eprintln!(
        "train: wrote {} and {}",
        args.model_out.display(),
        report::sidecar_path(&args.model_out).display()
    );
    Ok(())
}

/// Builds the label space for a mode over the labels present in a dataset.
pub fn build_space(dataset: &SignatureDataset, classes: usize) -> Result<LabelSpace, String> {
    match classes {
        5 => Ok(LabelSpace::aami()),
        23 => {
            let labels: Vec<u8> = dataset.beats.iter().map(|b| b.label).collect();
            LabelSpace::fine_grained(&labels, 23).map_err(|e| e.to_string())
        }
        other => Err(format!("--classes must be 5 or 23, got {other}")),
    }
}

/// Trains one model on the selected beats of a dataset.
///
/// Seeding: the RNG stream is derived from the seed and the label-space
/// mode, so a 23- and a 5-class model trained in the same run get
/// independent but reproducible initializations and shuffles — and the
/// 5-class model comes out identical whether or not a 23-class model was
/// trained beside it.
#[allow(clippy::too_many_arguments)]
pub fn fit(
    dataset: &SignatureDataset,
    train_indices: &[usize],
    space: &LabelSpace,
    classes: usize,
    hidden: &[usize],
    train_config: &TrainConfig,
    stamp: RunStamp,
    seed: u64,
) -> Result<Trained, String> {
    let mut dims = Vec::with_capacity(hidden.len() + 2);
    dims.push(dataset.input_len());
    dims.extend_from_slice(hidden);
    dims.push(space.class_count());

    let cols = dataset.grid_cols as usize;
    let inputs: Vec<SparseVector> = train_indices
        .iter()
        .map(|&i| dataset.beats[i].signature.indexed(cols).collect())
        .collect();
    let all_labels = true_classes(dataset, space);
    let labels: Vec<usize> = train_indices.iter().map(|&i| all_labels[i]).collect();

    let mut rng = DetRng::new(seed).derive(classes as u64);
    let mut model = MlpModel::new(&dims, &mut rng).map_err(|e| e.to_string())?;

    let started = Instant::now();
    let stats = model.train(&inputs, &labels, train_config, &mut rng).map_err(|e| e.to_string())?;
    for s in &stats {
        eprintln!(
            "train[{}] epoch {:>3}: loss {:.6}  accuracy {:.4}  ({:.2}s)",
            report::space_tag(classes),
            s.epoch,
            s.mean_loss,
            s.train_accuracy,
            s.wall_time_s
        );
    }
    eprintln!(
        "train[{}]: {} examples, dims {:?}, {:.2}s total",
        report::space_tag(classes),
        inputs.len(),
        dims,
        started.elapsed().as_secs_f64()
    );

    let meta = ModelMeta::new(stamp, dims, classes, space.clone(), train_config, &stats);
    Ok(Trained { model, meta })
}
