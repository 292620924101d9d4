//! `detect`: run the QRS detector and emit one CSV line per beat.

use std::time::Instant;

use ecg_core::qrs::{detect_qrs, DetectorConfig};

use crate::args::DetectArgs;
use crate::config::Context;
use crate::{data, report, CliError, Stage};

/// Output: `record,sample_index,time_s`, one line per detected beat, in
/// record order then beat order.
pub fn run(ctx: &Context, args: &DetectArgs) -> Result<(), CliError> {
    let stage = Stage::Detect;
    let channel: usize = ctx.setting(args.channel, "channel", 0).map_err(CliError::at(stage))?;

    let mut csv = String::from("record,sample_index,time_s\n");
    for name in &args.records {
        let record = data::load(&ctx.data_dir, name, stage)?;
        data::check_channel(&record, channel, stage)?;
        let signal = record.channel_mv(channel);
        let fs = record.header.sampling_rate;

        let started = Instant::now();
        let detections = detect_qrs(&signal, fs, &DetectorConfig::default())
            .map_err(|e| CliError::new(stage, format!("record {name}: {e}")))?;
        eprintln!(
            "detect {name}: {} beats in {:.1} ms",
            detections.len(),
            started.elapsed().as_secs_f64() * 1e3
        );

        for detection in &detections {
            let time_s = detection.sample as f64 / fs as f64;
            csv.push_str(&format!("{name},{},{time_s:.6}\n", detection.sample));
        }
    }

    print!("{csv}");
    if let Some(path) = &args.out {
        report::write_text(path, &csv, stage)?;
    }
    Ok(())
}
