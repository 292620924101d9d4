//! `online`: stream one record through detect → encode → classify, timing
//! each stage per beat as a live deployment would.
//!
//! Beats are encoded at *detected* positions (annotations are not
//! consulted), so this measures the deployable path end to end.

use std::time::Instant;

use ecg_core::qrs::{detect_qrs, DetectorConfig};
use ecg_core::signature::{EncoderConfig, SignatureEncoder};

use crate::args::OnlineArgs;
use crate::commands::eval::load_model_with_meta;
use crate::config::Context;
use crate::{data, CliError, Stage};

/// Output: a header, one `sample_index,class,confidence,t_detect_us,
/// t_encode_ms,t_classify_ms` line per beat, and a final `medians` line in
/// the same columns.  Detection runs once over the whole record, so
/// `t_detect_us` is the per-beat amortized share of that pass.
pub fn run(ctx: &Context, args: &OnlineArgs) -> Result<(), CliError> {
    let stage = Stage::Eval;
    let record = data::load(&ctx.data_dir, &args.record, stage)?;
    let channel: usize = ctx.setting(args.channel, "channel", 0).map_err(CliError::at(stage))?;
    data::check_channel(&record, channel, stage)?;
    let (model, meta, _) = load_model_with_meta(&args.model, stage)?;

    let encoder = SignatureEncoder::new(EncoderConfig::default());
    if model.input_len() != encoder.config().grid_cells() {
        return Err(CliError::new(
            stage,
            format!(
                "model expects {} inputs but signatures have {} cells",
                model.input_len(),
                encoder.config().grid_cells()
            ),
        ));
    }

    let signal = record.channel_mv(channel);
    let detect_start = Instant::now();
    let detections = detect_qrs(&signal, record.header.sampling_rate, &DetectorConfig::default())
        .map_err(|e| CliError::new(stage, format!("record {}: {e}", args.record)))?;
    let detect_total_us = detect_start.elapsed().as_secs_f64() * 1e6;
    let detect_us = if detections.is_empty() {
        0.0
    } else {
        detect_total_us / detections.len() as f64
    };

    let grid_cols = encoder.config().grid_cols();
    let mut encode_ms = Vec::with_capacity(detections.len());
    let mut classify_ms = Vec::with_capacity(detections.len());

    println!("sample_index,class,confidence,t_detect_us,t_encode_ms,t_classify_ms");
    for detection in &detections {
        let encode_start = Instant::now();
        let signature = encoder.encode_beat(&signal, detection.sample);
        let t_encode= encode_start.elapsed().as_secs_f64() * 1e3;

        let input: Vec<(usize, f64)> = signature.indexed(grid_cols).collect();
        let classify_start = Instant::now();
        let (class, confidence) = model
            .predict_sparse(&input)
            .map_err(|e| CliError::new(stage, format!("classifying beat: {e}")))?;
        let t_classify = classify_start.elapsed().as_secs_f64() * 1e3;

        encode_ms.push(t_encode);
        classify_ms.push(t_classify);
        println!(
            "{},{},{confidence:.4},{detect_us:.2},{t_encode:.4},{t_classify:.4}",
            detection.sample,
            meta.label_space.name(class),
        );
    }

    println!(
        "medians,,,{detect_us:.2},{:.4},{:.4}",
        median(&mut encode_ms),
        median(&mut classify_ms)
    );
    eprintln!(
        "online {}: {} beats, detection pass {:.1} ms",
        args.record,
        detections.len(),
        detect_total_us / 1e3
    );
    Ok(())
}

/// Median with the usual even-count averaging; `0.0` for no samples.
fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_handles_odd_even_and_empty() {
        assert_eq!(median(&mut []), 0.0);
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
