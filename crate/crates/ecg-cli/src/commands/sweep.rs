//! `noise-sweep`: corrupt one record at several signal-to-noise ratios and
//! measure how much of the reference beat list the full detect → encode →
//! classify chain still gets right.

use ecg_core::eval::{noise_sweep, SweepConfig};
use ecg_core::signature::{EncoderConfig, SignatureEncoder};

use crate::args::SweepArgs;
use crate::commands::eval::load_model_with_meta;
use crate::config::{parse_snr_spec, Context};
use crate::{data, report, CliError, Stage};

/// Output: `snr_db,accuracy`, one row per ratio, where accuracy is the
/// fraction of annotated beats both found and correctly classified.
pub fn run(ctx: &Context, args: &SweepArgs) -> Result<(), CliError> {
    let stage = Stage::Eval;
    let record = data::load(&ctx.data_dir, &args.record, stage)?;
    let (model, meta, _) = load_model_with_meta(&args.model, stage)?;

    let spec: String =
        ctx.setting(args.snr.clone(), "snr", "0:20:2".to_string()).map_err(CliError::at(stage))?;
    let snrs = parse_snr_spec(&spec).map_err(CliError::at(stage))?;
    let config = SweepConfig {
        channel: ctx.setting(args.channel, "channel", 0).map_err(CliError::at(stage))?,
        tolerance_ms: ctx
            .setting(args.tolerance_ms, "tolerance_ms", 150.0)
            .map_err(CliError::at(stage))?,
        ..SweepConfig::default()
    };

    let encoder = SignatureEncoder::new(EncoderConfig::default());
    let points = noise_sweep(
        &record,
        &encoder,
        &model,
        &meta.label_space,
        &snrs,
        ctx.seed,
        &config,
    )
    .map_err(|e| CliError::new(stage, format!("record {}: {e}", args.record)))?;

    let mut csv = String::from("snr_db,accuracy\n");
    for point in &points {
        csv.push_str(&format!("{},{}\n", point.snr_db, report::csv_f64(point.score)));
        eprintln!(
            "sweep {} dB: {}/{} beats matched, {} also correct (sensitivity {:.4}{})",
            point.snr_db,
            point.matched,
            point.reference_beats,
            point.matched_and_correct,
            point.sensitivity,
            if point.degenerate { ", degenerate trace" } else { "" },
        );
    }

    print!("{csv}");
    if let Some(path) = &args.out {
        report::write_text(path, &csv, stage)?;
    }
    Ok(())
}
