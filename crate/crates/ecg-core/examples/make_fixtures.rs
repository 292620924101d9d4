//! Regenerates the checked-in record fixtures under `tests/fixtures/`.
//!
//! The fixtures are deterministic, so re-running this produces byte-identical
//! files.  Reference CSV dumps for the same records come from the
//! independent decoder in `tools/ref_decode.py`; see the fixture README for
//! the full regeneration recipe.
//!
//! Three short records are written:
//!
//! * `100` — 30 s, dominated by normal beats with a few atrial prematures.
//! * `208` — 30 s, a heavy ventricular / fusion mix.
//! * `106` — 300 s, normal beats with ventricular runs.  Its annotation
//!   stream also carries a ten-second annotation dropout (which forces a
//!   long-delta SKIP word), a mid-record signal-quality note, and a rhythm
//!   label sharing a beat's sample — the awkward cases an annotation parser
//!   has to survive.

use std::path::PathBuf;

use ecg_core::fixtures::write_record_files;
use ecg_core::synth::{fixture_config, generate, SynthConfig};

fn main() {
    let out_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    std::fs::create_dir_all(&out_dir).expect("create fixture directory");

    for (name, duration_s) in [("100", 30.0), ("208", 30.0), ("106", 300.0)] {
        let config = SynthConfig {
            duration_s,
            ..fixture_config(name).expect("known fixture")
        };
        let record = generate(&config);
        let fs = config.sampling_rate as f64;

        // Start with the usual leading rhythm label, then the beats.
        let mut annotations: Vec<(u64, u8)> = vec![(8, 28)];
        annotations.extend(&record.annotations);

        if name == "106" {
            // Drop the annotations between 100 s and 110 s: the next beat
            // then sits more than 1023 samples after its predecessor, which
            // the writer must encode as a SKIP word.
            annotations.retain(|&(sample, _)| {
                let t = sample as f64 / fs;
                !(100.0..110.0).contains(&t)
            });
            // A signal-quality note in the middle of the dropout.
            let quality_at = (105.0 * fs) as u64;
            let pos = annotations.partition_point(|&(s, _)| s <= quality_at);
            annotations.insert(pos, (quality_at, 14));
            // A rhythm change sharing its sample with a beat.
            if let Some(&(beat_sample, _)) = annotations
                .iter()
                .find(|&&(s, code)| code != 28 && s as f64 / fs > 60.0)
            {
                let pos = annotations.partition_point(|&(s, _)| s <= beat_sample);
                annotations.insert(pos, (beat_sample, 28));
            }
        }

        let paths = write_record_files(
            &out_dir,
            name,
            config.sampling_rate,
            &record.channels,
            &["MLII", "V1"],
            &annotations,
        )
        .expect("write fixture record");
        for path in paths {
            println!("wrote {}", path.display());
        }
    }
}
