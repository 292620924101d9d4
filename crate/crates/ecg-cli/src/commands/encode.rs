//! `encode`: turn every annotated beat into a sparse signature file.
//!
//! This is the offline path, so beat positions and labels come from the
//! reference annotations; the online and noise-sweep paths encode at
//! detector positions instead.

use std::time::Instant;

use ecg_core::signature::{write_dataset, EncoderConfig, SignatureEncoder};
use serde::Serialize;

use crate::args::EncodeArgs;
use crate::config::{config_hash, Context};
use crate::report::RunStamp;
use crate::{data, report, CliError, Stage};

/// Semantic settings for the configuration stamp.  Output paths and worker
/// counts are excluded: they do not affect a single encoded byte.
#[derive(Serialize)]
struct Settings<'a> {
    command: &'static str,
    records: &'a [String],
    channel: usize,
}

/// Sidecar describing a signature file.
#[derive(Serialize)]
pub struct EncodeMeta<'a> {
    pub stamp: RunStamp,
    pub records: &'a [String],
    pub channel: usize,
    pub beats: usize,
    /// Beats whose segment was entirely flat (no signature cells).
    pub degenerate_beats: usize,
}

pub fn run(ctx: &Context, args: &EncodeArgs) -> Result<(), CliError> {
    let stage = Stage::Encode;
    let channel: usize = ctx.setting(args.channel, "channel", 0).map_err(CliError::at(stage))?;

    let mut records = Vec::with_capacity(args.records.len());
    for name in &args.records {
        records.push(data::load(&ctx.data_dir, name, stage)?);
    }

    let encoder = SignatureEncoder::new(EncoderConfig::default());
    let started = Instant::now();
    let dataset = data::encode_annotated(&records, channel, &encoder, ctx.jobs)?;
    let degenerate = dataset.beats.iter().filter(|b| b.signature.is_degenerate()).count();
    eprintln!(
        "encode: {} beats from {} records in {:.1} ms ({} degenerate)",
        dataset.beats.len(),
        records.len(),
        started.elapsed().as_secs_f64() * 1e3,
        degenerate,
    );

    write_dataset(&args.out, &dataset)
        .map_err(|e| CliError::new(stage, format!("writing {}: {e}", args.out.display())))?;

    let stamp = RunStamp {
        config_hash: config_hash(&Settings {
            command: "encode",
            records: &args.records,
            channel,
        }),
        seed: ctx.seed,
    };
    let meta = EncodeMeta {
        stamp,
        records: &args.records,
        channel,
        beats: dataset.beats.len(),
        degenerate_beats: degenerate,
    };
    let sidecar = report::sidecar_path(&args.out);
    report::write_json(&sidecar, &meta, stage)?;
    eprintln!("encode: wrote {} and {}", args.out.display(), sidecar.display());
    Ok(())
}
