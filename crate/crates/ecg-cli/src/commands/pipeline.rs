//! `pipeline`: the whole offline phase in one run — detect (as a health
//! check), encode, split, train, evaluate — leaving a self-describing set
//! of artifacts in the output directory:
//!
//! * `signatures.ecgs` (+ `.json` sidecar) — every annotated beat, encoded;
//! * `model_5.ecgm` / `model_23.ecgm` (+ sidecars) — trained classifiers;
//! * `report.json` — detector quality, split shape, and every score;
//! * `per_class.csv`, `summary.csv`, and `table1.csv` (when both label
//!   spaces run) — flat tables of the same numbers.
//!
//! Re-running with an identical configuration and seed reproduces every
//! artifact byte for byte; wall-clock timings go to stderr only.

use std::time::Instant;

use ecg_core::eval::{classify_beats, stratified_split, LabelSpace};
use ecg_core::mlp::{save_model, TrainConfig};
use ecg_core::qrs::{detect_qrs, match_detections, DetectorConfig};
use ecg_core::rng::DetRng;
use ecg_core::signature::{write_dataset, EncoderConfig, SignatureDataset, SignatureEncoder};
use ecg_core::wfdb::{AamiClass, EcgRecord};
use serde::Serialize;

use crate::args::PipelineArgs;
use crate::commands::encode::EncodeMeta;
use crate::commands::{eval, train};
use crate::config::{config_hash, default_train_count, parse_hidden, Context};
use crate::report::{self, RunStamp, SpaceResult};
use crate::{data, CliError, Stage};

/// Which label spaces to train and evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ClassMode {
    Five,
    TwentyThree,
    Both,
}

impl ClassMode {
    fn parse(text: &str) -> Result<ClassMode, String> {
        match text {
            "5" => Ok(ClassMode::Five),
            "23" => Ok(ClassMode::TwentyThree),
            "both" => Ok(ClassMode::Both),
            other => Err(format!("--classes must be 5, 23, or both, got `{other}`")),
        }
    }

    /// Modes to run, finest first (the split stratifies on the first).
    fn requested(self) -> Vec<usize> {
        match self {
            ClassMode::Five => vec![5],
            ClassMode::TwentyThree => vec![23],
            ClassMode::Both => vec![23, 5],
        }
    }
}

#[derive(Serialize)]
struct Settings<'a> {
    command: &'static str,
    records: &'a [String],
    channel: usize,
    classes: &'a str,
    hidden: &'a [usize],
    epochs: usize,
    learning_rate: f64,
    momentum: f64,
    batch_size: usize,
    train_count: Option<usize>,
    tolerance_ms: f64,
    seed: u64,
}

/// Detector health on one record, measured against its annotations.
#[derive(Debug, Clone, Serialize)]
struct DetectorQuality {
    record: String,
    annotated: usize,
    detected: usize,
    matched: usize,
    sensitivity: f64,
    positive_predictivity: f64,
}

#[derive(Serialize)]
struct SplitSummary {
    train_beats: usize,
    test_beats: usize,
}

/// One row of the 23-class-training vs 5-class-training comparison.
///
/// Fine-grained predictions are folded to the five beat families before
/// scoring, so both columns grade the same five-way decision.
#[derive(Debug, Clone, Serialize)]
struct Table1Row {
    class: String,
    beats: u64,
    accuracy_23_mapped: Option<f64>,
    accuracy_5: Option<f64>,
    /// 5-class advantage in percentage points, when both sides have beats.
    delta_pp: Option<f64>,
}

#[derive(Serialize)]
struct PipelineReport<'a> {
    stamp: &'a RunStamp,
    records: &'a [String],
    channel: usize,
    detector: &'a [DetectorQuality],
    beats: usize,
    degenerate_beats: usize,
    split: SplitSummary,
    results: &'a [SpaceResult],
    #[serde(skip_serializing_if = "Option::is_none")]
    table1: Option<&'a [Table1Row]>,
}

pub fn run(ctx: &Context, args: &PipelineArgs) -> Result<(), CliError> {
    // --- resolve settings (errors belong to the first stage) -------------
    let resolve = Stage::Detect;
    let records = resolve_records(ctx, args).map_err(CliError::at(resolve))?;
    let channel: usize = ctx.setting(args.channel, "channel", 0).map_err(CliError::at(resolve))?;
    let mode_text: String =
        ctx.setting(args.classes.clone(), "classes", "both".to_string())
            .map_err(CliError::at(resolve))?;
    let mode = ClassMode::parse(&mode_text).map_err(CliError::at(resolve))?;
    let hidden_text: String =
        ctx.setting(args.hidden.clone(), "hidden", "256".to_string()).map_err(CliError::at(resolve))?;
    let hidden = parse_hidden(&hidden_text).map_err(CliError::at(resolve))?;
    let train_config = TrainConfig {
        learning_rate: ctx.setting(args.lr, "lr", 0.1).map_err(CliError::at(resolve))?,
        momentum: ctx.setting(args.momentum, "momentum", 0.9).map_err(CliError::at(resolve))?,
        batch_size: ctx.setting(args.batch, "batch", 32).map_err(CliError::at(resolve))?,
        epochs: ctx.setting(args.epochs, "epochs", 10).map_err(CliError::at(resolve))?,
    };
    let train_count: Option<usize> = match args.train_count {
        Some(n) => Some(n),
        None => ctx.parsed_key("train_count").map_err(CliError::at(resolve))?,
    };
    let tolerance_ms: f64 =
        ctx.setting(args.tolerance_ms, "tolerance_ms", 150.0).map_err(CliError::at(resolve))?;

    let stamp = RunStamp {
        config_hash: config_hash(&Settings {
            command: "pipeline",
            records: &records,
            channel,
            classes: &mode_text,
            hidden: &hidden,
            epochs: train_config.epochs,
            learning_rate: train_config.learning_rate,
            momentum: train_config.momentum,
            batch_size: train_config.batch_size,
            train_count,
            tolerance_ms,
            seed: ctx.seed,
        }),
        seed: ctx.seed,
    };
    eprintln!("pipeline: config {} seed {}", &stamp.config_hash[..12], ctx.seed);
    std::fs::create_dir_all(&args.out_dir).map_err(|e| {
        CliError::new(resolve, format!("creating {}: {e}", args.out_dir.display()))
    })?;

    // --- detect (health check against the annotations) -------------------
    let mut loaded: Vec<EcgRecord> = Vec::with_capacity(records.len());
    for name in &records {
        loaded.push(data::load(&ctx.data_dir, name, Stage::Detect)?);
    }
    let mut detector_quality = Vec::with_capacity(loaded.len());
    for record in &loaded {
        data::check_channel(record, channel, Stage::Detect)?;
        let started = Instant::now();
        let detections =
            detect_qrs(record.channel_mv(channel).as_slice(), record.header.sampling_rate,
                &DetectorConfig::default())
            .map_err(|e| {
                CliError::new(Stage::Detect, format!("record {}: {e}", record.header.name))
            })?;
        let truth: Vec<u64> = record.annotations.iter().map(|a| a.sample).collect();
        let matches =
            match_detections(&detections, &truth, tolerance_ms, record.header.sampling_rate);
        eprintln!(
            "detect {}: {}/{} annotated beats matched ({} detections) in {:.1} ms",
            record.header.name,
            matches.true_positives,
            truth.len(),
            detections.len(),
            started.elapsed().as_secs_f64() * 1e3
        );
        detector_quality.push(DetectorQuality {
            record: record.header.name.clone(),
            annotated: truth.len(),
            detected: detections.len(),
            matched: matches.true_positives,
            sensitivity: matches.sensitivity(),
            positive_predictivity: matches.positive_predictivity(),
        });
    }

    // --- encode -----------------------------------------------------------
    let encoder = SignatureEncoder::new(EncoderConfig::default());
    let started = Instant::now();
    let dataset = data::encode_annotated(&loaded, channel, &encoder, ctx.jobs)?;
    let degenerate = dataset.beats.iter().filter(|b| b.signature.is_degenerate()).count();
    eprintln!(
        "encode: {} beats in {:.1} ms ({} degenerate)",
        dataset.beats.len(),
        started.elapsed().as_secs_f64() * 1e3,
        degenerate
    );
    let signatures_path = args.out_dir.join("signatures.ecgs");
    write_dataset(&signatures_path, &dataset).map_err(|e| {
        CliError::new(Stage::Encode, format!("writing {}: {e}", signatures_path.display()))
    })?;
    report::write_json(
        &report::sidecar_path(&signatures_path),
        &EncodeMeta {
            stamp: stamp.clone(),
            records: &records,
            channel,
            beats: dataset.beats.len(),
            degenerate_beats: degenerate,
        },
        Stage::Encode,
    )?;

    // --- split -------------------------------------------------------------
    let modes = mode.requested();
    let mut spaces = Vec::with_capacity(modes.len());
    for &classes in &modes {
        spaces.push(train::build_space(&dataset, classes).map_err(CliError::at(Stage::Train))?);
    }
    let strat_labels = ecg_core::eval::true_classes(&dataset, &spaces[0]);
    let n_train = train_count.unwrap_or_else(|| default_train_count(dataset.beats.len()));
    let split = stratified_split(&strat_labels, n_train, &mut DetRng::new(ctx.seed).derive(1))
        .map_err(|e| CliError::new(Stage::Train, format!("splitting {n_train} training beats: {e}")))?;
    eprintln!("split: {} train / {} test beats", split.train.len(), split.test.len());

    // --- train + evaluate each requested space -----------------------------
    let mut results: Vec<SpaceResult> = Vec::with_capacity(modes.len());
    let mut trained: Vec<train::Trained> = Vec::with_capacity(modes.len());
    for (&classes, space) in modes.iter().zip(&spaces) {
        let fitted = train::fit(
            &dataset,
            &split.train,
            space,
            classes,
            &hidden,
            &train_config,
            stamp.clone(),
            ctx.seed,
        )
        .map_err(CliError::at(Stage::Train))?;

        let model_path = args.out_dir.join(format!("model_{classes}.ecgm"));
        save_model(&model_path, &fitted.model).map_err(|e| {
            CliError::new(Stage::Train, format!("writing {}: {e}", model_path.display()))
        })?;
        report::write_sidecar(&model_path, &fitted.meta)?;

        let result = eval::score(&fitted.model, &fitted.meta, &dataset, &split.test)
            .map_err(CliError::at(Stage::Eval))?;
        eprintln!(
            "eval[{}]: overall {:.4}, patient avg {:.4} on {} test beats",
            result.space, result.overall_accuracy, result.patient_avg_accuracy, result.beats
        );
        results.push(result);
        trained.push(fitted);
    }

    // --- 23-vs-5 comparison table -------------------------------------------
    let table1 = if mode == ClassMode::Both {
        Some(comparison_table(&dataset, &split.test, &trained, &spaces)
            .map_err(CliError::at(Stage::Eval))?)
    } else {
        None
    };

    // --- artifacts ----------------------------------------------------------
    let payload = PipelineReport {
        stamp: &stamp,
        records: &records,
        channel,
        detector: &detector_quality,
        beats: dataset.beats.len(),
        degenerate_beats: degenerate,
        split: SplitSummary { train_beats: split.train.len(), test_beats: split.test.len() },
        results: &results,
        table1: table1.as_deref(),
    };
    report::write_json(&args.out_dir.join("report.json"), &payload, Stage::Eval)?;
    report::write_text(
        &args.out_dir.join("per_class.csv"),
        &report::per_class_csv(&results),
        Stage::Eval,
    )?;
    let summary = report::summary_csv(&results);
    report::write_text(&args.out_dir.join("summary.csv"), &summary, Stage::Eval)?;
    if let Some(rows) = &table1 {
        report::write_text(&args.out_dir.join("table1.csv"), &table1_csv(rows), Stage::Eval)?;
    }
    eprintln!("pipeline: artifacts in {}", args.out_dir.display());
    print!("{summary}");
    Ok(())
}

/// Records from the flag, or from the config file's `records` key.
fn resolve_records(ctx: &Context, args: &PipelineArgs) -> Result<Vec<String>, String> {
    let records: Vec<String> = if args.records.is_empty() {
        match ctx.file.raw("records") {
            Some(text) => text.split(',').map(|s| s.trim().to_string()).collect(),
            None => Vec::new(),
        }
    } else {
        args.records.clone()
    };
    if records.is_empty() || records.iter().any(String::is_empty) {
        return Err("no records given (use --records or a `records` config key)".to_string());
    }
    Ok(records)
}

/// Scores both trained models on the shared test beats in five-family
/// terms: the 5-class model natively, the 23-class model by folding each
/// predicted symbol class into its beat family (catch-all buckets fold to
/// the unclassifiable family).
fn comparison_table(
    dataset: &SignatureDataset,
    test: &[usize],
    trained: &[train::Trained],
    spaces: &[LabelSpace],
) -> Result<Vec<Table1Row>, String> {
    let aami = LabelSpace::aami();
    let fine = &spaces[0];
    let (model_23, model_5) = (&trained[0].model, &trained[1].model);

    let pred_23 = classify_beats(model_23, dataset, test).map_err(|e| e.to_string())?;
    let pred_5 = classify_beats(model_5, dataset, test).map_err(|e| e.to_string())?;

    let classes = aami.class_count();
    let fold = |fine_class: usize| -> usize {
        fine.code_of_class(fine_class)
            .map_or(AamiClass::Unknown.index(), |code| aami.class_of(code))
    };

    // counts[c] = (beats, correct under 23-mapped, correct under 5).
    let mut counts = vec![(0u64, 0u64, 0u64); classes];
    for (slot, &beat) in test.iter().enumerate() {
        let actual = aami.class_of(dataset.beats[beat].label);
        let row = &mut counts[actual];
        row.0 += 1;
        if fold(pred_23[slot]) == actual {
            row.1 += 1;
        }
        if pred_5[slot] == actual {
            row.2 += 1;
        }
    }

    let ratio = |num: u64, den: u64| if den == 0 { None } else { Some(num as f64 / den as f64) };
    let mut rows: Vec<Table1Row> = Vec::with_capacity(classes + 1);
    for (class, &(beats, correct_23, correct_5)) in counts.iter().enumerate() {
        let accuracy_23_mapped = ratio(correct_23, beats);
        let accuracy_5 = ratio(correct_5, beats);
        rows.push(Table1Row {
            class: aami.name(class).to_string(),
            beats,
            accuracy_23_mapped,
            accuracy_5,
            delta_pp: delta_pp(accuracy_23_mapped, accuracy_5),
        });
    }
    let total: u64 = counts.iter().map(|c| c.0).sum();
    let overall_23 = ratio(counts.iter().map(|c| c.1).sum(), total);
    let overall_5 = ratio(counts.iter().map(|c| c.2).sum(), total);
    rows.push(Table1Row {
        class: "overall".to_string(),
        beats: total,
        accuracy_23_mapped: overall_23,
        accuracy_5: overall_5,
        delta_pp: delta_pp(overall_23, overall_5),
    });
    Ok(rows)
}

fn delta_pp(accuracy_23: Option<f64>, accuracy_5: Option<f64>) -> Option<f64> {
    match (accuracy_23, accuracy_5) {
        (Some(a23), Some(a5)) => Some((a5 - a23) * 100.0),
        _ => None,
    }
}

fn table1_csv(rows: &[Table1Row]) -> String {
    let mut out = String::from("class,beats,accuracy_23_mapped,accuracy_5,delta_pp\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.class,
            row.beats,
            report::csv_opt(row.accuracy_23_mapped),
            report::csv_opt(row.accuracy_5),
            report::csv_opt(row.delta_pp),
        ));
    }
    out
}
