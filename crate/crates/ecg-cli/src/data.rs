//! Record loading and beat encoding shared by several commands.

use std::path::Path;

use ecg_core::signature::{EncodedBeat, SignatureDataset, SignatureEncoder};
use ecg_core::wfdb::{load_record, EcgRecord};
use rayon::prelude::*;

use crate::{CliError, Stage};

/// Loads one record from `data_dir`, attributing failures to `stage` and
/// naming the record in the message.
pub fn load(data_dir: &Path, name: &str, stage: Stage) -> Result<EcgRecord, CliError> {
    load_record(data_dir, name)
        .map_err(|e| CliError::new(stage, format!("record {name}: {e}")))
}

/// Numeric id a record is stored under in signature files.  Database
/// records are named by number; anything else cannot be represented.
pub fn record_id(name: &str) -> Result<u16, String> {
    name.parse()
        .map_err(|_| format!("record name `{name}` is not a number 0..=65535; signature files key beats by numeric record id"))
}

/// Checks a channel index against what a record actually carries.
pub fn check_channel(record: &EcgRecord, channel: usize, stage: Stage) -> Result<(), CliError> {
    if channel >= record.signals.len() {
        return Err(CliError::new(
            stage,
            format!(
                "record {} has {} channels, no channel {channel}",
                record.header.name,
                record.signals.len()
            ),
        ));
    }
    Ok(())
}

/// Runs `work` on a worker pool of `jobs` threads (0 = the default pool).
pub fn with_pool<T, F>(jobs: usize, stage: Stage, work: F) -> Result<T, CliError>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    if jobs == 0 {
        return Ok(work());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::new(stage, format!("worker pool: {e}")))?;
    Ok(pool.install(work))
}

/// Encodes every annotated beat of the given records into one dataset.
///
/// Beats are encoded in parallel; the output order (record order, then beat
/// order) and content are independent of the worker count, since each beat
/// is a pure function of its segment.
pub fn encode_annotated(
    records: &[EcgRecord],
    channel: usize,
    encoder: &SignatureEncoder,
    jobs: usize,
) -> Result<SignatureDataset, CliError> {
    let stage = Stage::Encode;
    let mut traces: Vec<Vec<f64>> = Vec::with_capacity(records.len());
    let mut work: Vec<(usize, u16, u64, u8)> = Vec::new();
    for (index, record) in records.iter().enumerate() {
        check_channel(record, channel, stage)?;
        let id = record_id(&record.header.name).map_err(CliError::at(stage))?;
        traces.push(record.channel_mv(channel));
        for beat in &record.annotations {
            work.push((index, id, beat.sample, beat.code));
        }
    }

    let beats: Result<Vec<EncodedBeat>, CliError> = with_pool(jobs, stage, || {
        work.par_iter()
            .map(|&(index, id, sample, code)| {
                let sample32 = u32::try_from(sample).map_err(|_| {
                    CliError::new(stage, format!("beat position {sample} overflows the container"))
                })?;
                Ok(EncodedBeat {
                    record_id: id,
                    sample: sample32,
                    label: code,
                    signature: encoder.encode_beat(&traces[index], sample),
                })
            })
            .collect()
    })?;

    let config = encoder.config();
    let mut dataset =
        SignatureDataset::new(config.grid_rows() as u8, config.grid_cols() as u8);
    dataset.beats = beats?;
    Ok(dataset)
}
