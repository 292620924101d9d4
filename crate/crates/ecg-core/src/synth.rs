//! Deterministic synthetic ECG records for the test suites.
//!
//! Real arrhythmia-database records cannot be redistributed with this
//! repository, so the tests run against fabricated ones: two-channel
//! records with plausible PQRST morphology, per-class waveform variants,
//! heart-rate jitter, baseline wander, and sensor noise, all driven by
//! [`crate::rng::DetRng`] so a seed pins every sample and annotation.
//!
//! The waveforms are sums of Gaussian bumps tuned to *exercise* the
//! pipeline — wide ventricular complexes, premature atrial timing, pacing
//! spikes — not to model any patient. Class mixes for the canned configs
//! mirror the flavor of well-known records (one N-dominant, one heavy
//! ventricular/fusion mix, one intermittent-ventricular) without copying
//! any data.

use crate::rng::DetRng;
use crate::wfdb::{
    aami_class_for_code, symbol_for_code, AamiClass, BeatAnnotation, EcgRecord, RecordHeader,
    SignalSpec,
};

/// Configuration for one synthetic record.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub duration_s: f64,
    pub sampling_rate: u32,
    /// Mean heart rate driving the base RR interval.
    pub mean_hr_bpm: f64,
    /// Fractional standard deviation of RR jitter (e.g. 0.04).
    pub rr_jitter: f64,
    /// Standard deviation of additive sensor noise, in mV.
    pub noise_mv: f64,
    /// Peak amplitude of slow baseline wander, in mV.
    pub wander_mv: f64,
    /// Beat classes as `(annotation code, weight)`; weights need not sum
    /// to 1.
    pub beat_mix: Vec<(u8, f64)>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 1,
            duration_s: 60.0,
            sampling_rate: 360,
            mean_hr_bpm: 75.0,
            rr_jitter: 0.04,
            noise_mv: 0.015,
            wander_mv: 0.05,
            beat_mix: vec![(1, 1.0)],
        }
    }
}

/// A generated record: two channels of ADC samples plus beat annotations.
#[derive(Debug, Clone)]
pub struct SynthRecord {
    /// ADC samples (gain 200, baseline 1024), channel-major.
    pub channels: Vec<Vec<i32>>,
    /// `(R-peak sample, annotation code)`, strictly increasing.
    pub annotations: Vec<(u64, u8)>,
}

/// ADC gain used when quantizing the synthetic millivolt signal.
pub const SYNTH_GAIN: f64 = 200.0;
/// ADC baseline used when quantizing.
pub const SYNTH_BASELINE: i32 = 1024;

/// One Gaussian bump: amplitude (mV), center offset from the R peak (s),
/// and width (s).
#[derive(Debug, Clone, Copy)]
struct Bump {
    amp: f64,
    mu: f64,
    sigma: f64,
}

const fn bump(amp: f64, mu: f64, sigma: f64) -> Bump {
    Bump { amp, mu, sigma }
}

/// Morphology and timing behavior for one beat class.
struct BeatShape {
    /// Annotation code this shape is emitted under.
    code: u8,
    /// Bumps for channel 0 (the lead the pipeline classifies on).
    bumps: &'static [Bump],
    /// Multiplier on the RR interval *before* this beat (<1 = premature,
    /// >1 = escape/compensated).
    rr_before: f64,
    /// Multiplier on the RR interval *after* this beat.
    rr_after: f64,
}

/// Per-class waveforms. Amplitudes/widths are chosen so that classes are
/// genuinely distinguishable in the time-frequency plane: ventricular
/// complexes are wide and T-inverted, paced beats carry a narrow spike,
/// bundle-branch blocks are notched, atrial prematures keep a narrow QRS
/// but shift the P wave and the beat timing.
static SHAPES: &[BeatShape] = &[
    // N: textbook PQRST.
    BeatShape {
        code: 1,
        bumps: &[
            bump(0.12, -0.160, 0.025),
            bump(-0.08, -0.045, 0.010),
            bump(1.10, 0.000, 0.012),
            bump(-0.20, 0.035, 0.012),
            bump(0.30, 0.220, 0.050),
        ],
        rr_before: 1.0,
        rr_after: 1.0,
    },
    // L: wide notched R, discordant T.
    BeatShape {
        code: 2,
        bumps: &[
            bump(0.10, -0.170, 0.025),
            bump(0.85, -0.014, 0.022),
            bump(0.55, 0.032, 0.024),
            bump(-0.28, 0.250, 0.060),
        ],
        rr_before: 1.0,
        rr_after: 1.0,
    },
    // R: rSR' with deep S.
    BeatShape {
        code: 3,
        bumps: &[
            bump(0.11, -0.165, 0.025),
            bump(0.70, -0.010, 0.014),
            bump(-0.55, 0.030, 0.020),
            bump(0.45, 0.068, 0.018),
            bump(-0.15, 0.240, 0.055),
        ],
        rr_before: 1.0,
        rr_after: 1.0,
    },
    // a: aberrated atrial premature — early, moderately widened.
    BeatShape {
        code: 4,
        bumps: &[
            bump(0.14, -0.120, 0.014),
            bump(0.90, 0.000, 0.018),
            bump(-0.30, 0.042, 0.016),
            bump(0.24, 0.215, 0.048),
        ],
        rr_before: 0.70,
        rr_after: 1.18,
    },
    // V: wide, tall, no P, inverted T, compensatory pause.
    BeatShape {
        code: 5,
        bumps: &[
            bump(1.40, 0.000, 0.034),
            bump(-0.50, 0.072, 0.030),
            bump(-0.45, 0.290, 0.070),
        ],
        rr_before: 0.74,
        rr_after: 1.36,
    },
    // F: fusion of ventricular and normal — intermediate width.
    BeatShape {
        code: 6,
        bumps: &[
            bump(0.06, -0.150, 0.022),
            bump(1.20, 0.000, 0.022),
            bump(-0.32, 0.052, 0.020),
            bump(0.10, 0.245, 0.060),
        ],
        rr_before: 0.86,
        rr_after: 1.12,
    },
    // J: junctional premature — no P, narrow QRS.
    BeatShape {
        code: 7,
        bumps: &[
            bump(-0.07, -0.046, 0.010),
            bump(1.00, 0.000, 0.012),
            bump(-0.18, 0.034, 0.012),
            bump(0.27, 0.218, 0.050),
        ],
        rr_before: 0.76,
        rr_after: 1.15,
    },
    // A: atrial premature — early pointed P, narrow QRS.
    BeatShape {
        code: 8,
        bumps: &[
            bump(0.16, -0.130, 0.015),
            bump(-0.07, -0.044, 0.010),
            bump(0.95, 0.000, 0.012),
            bump(-0.18, 0.034, 0.012),
            bump(0.28, 0.212, 0.048),
        ],
        rr_before: 0.72,
        rr_after: 1.16,
    },
    // S: supraventricular premature, tiny P.
    BeatShape {
        code: 9,
        bumps: &[
            bump(0.05, -0.115, 0.013),
            bump(0.92, 0.000, 0.013),
            bump(-0.20, 0.035, 0.012),
            bump(0.26, 0.210, 0.047),
        ],
        rr_before: 0.74,
        rr_after: 1.14,
    },
    // E: ventricular escape — wide like V, but late and smaller.
    BeatShape {
        code: 10,
        bumps: &[
            bump(0.95, 0.000, 0.036),
            bump(-0.38, 0.075, 0.032),
            bump(-0.35, 0.295, 0.070),
        ],
        rr_before: 1.55,
        rr_after: 1.05,
    },
    // j: junctional escape — late, narrow, no P.
    BeatShape {
        code: 11,
        bumps: &[
            bump(0.98, 0.000, 0.012),
            bump(-0.17, 0.033, 0.012),
            bump(0.26, 0.215, 0.050),
        ],
        rr_before: 1.50,
        rr_after: 1.02,
    },
    // /: paced — stimulus spike then wide evoked complex.
    BeatShape {
        code: 12,
        bumps: &[
            bump(1.25, -0.056, 0.0035),
            bump(0.90, 0.000, 0.030),
            bump(-0.30, 0.265, 0.065),
        ],
        rr_before: 1.0,
        rr_after: 1.0,
    },
    // Q: unclassifiable — low, smeared complex.
    BeatShape {
        code: 13,
        bumps: &[
            bump(0.50, 0.000, 0.040),
            bump(-0.12, 0.080, 0.030),
            bump(0.08, 0.250, 0.060),
        ],
        rr_before: 0.95,
        rr_after: 1.05,
    },
    // e: atrial escape — late, normal-ish with merged P.
    BeatShape {
        code: 34,
        bumps: &[
            bump(0.07, -0.090, 0.020),
            bump(1.02, 0.000, 0.012),
            bump(-0.18, 0.034, 0.012),
            bump(0.27, 0.216, 0.050),
        ],
        rr_before: 1.48,
        rr_after: 1.02,
    },
    // f: fusion of paced and spontaneous.
    BeatShape {
        code: 38,
        bumps: &[
            bump(1.10, -0.050, 0.0035),
            bump(1.00, 0.000, 0.020),
            bump(-0.22, 0.040, 0.015),
            bump(0.16, 0.230, 0.055),
        ],
        rr_before: 0.94,
        rr_after: 1.06,
    },
];

fn shape_for_code(code: u8) -> &'static BeatShape {
    SHAPES
        .iter()
        .find(|s| s.code == code)
        .unwrap_or_else(|| panic!("no synthetic morphology for annotation code {code}"))
}

/// Generates one record. Deterministic in `config` (including the seed).
pub fn generate(config: &SynthConfig) -> SynthRecord {
    let fs = config.sampling_rate as f64;
    let n = (config.duration_s * fs).round() as usize;
    let mut rng = DetRng::new(config.seed);

    // --- schedule beats -------------------------------------------------
    let base_rr = 60.0 / config.mean_hr_bpm;
    let total_weight: f64 = config.beat_mix.iter().map(|(_, w)| w).sum();
    assert!(total_weight > 0.0, "beat mix must have positive total weight");

    let mut beats: Vec<(u64, u8)> = Vec::new();
    let mut t = 0.5 * base_rr.max(0.6); // lead-in before the first beat
    let mut prev_rr_after = 1.0;
    let margin = 0.55; // keep complexes clear of the record edges
    while t < config.duration_s - margin {
        let mut pick = rng.next_f64() * total_weight;
        let mut code = config.beat_mix[0].0;
        for &(c, w) in &config.beat_mix {
            code = c;
            if pick < w {
                break;
            }
            pick -= w;
        }
        let shape = shape_for_code(code);
        let jitter = 1.0 + config.rr_jitter * rng.next_normal();
        let rr = (base_rr * shape.rr_before * prev_rr_after * jitter).max(0.30);
        t += rr;
        if t >= config.duration_s - margin {
            break;
        }
        beats.push(((t * fs).round() as u64, code));
        prev_rr_after = shape.rr_after;
    }

    // --- render channels -------------------------------------------------
    let mut ch0 = vec![0.0f64; n];
    let mut ch1 = vec![0.0f64; n];
    for &(sample, code) in &beats {
        let shape = shape_for_code(code);
        let amp_scale = 1.0 + 0.05 * rng.next_normal();
        for b in shape.bumps {
            add_bump(&mut ch0, fs, sample, b.amp * amp_scale, b.mu, b.sigma);
            // Channel 1 is a crude second lead: attenuated, slightly wider,
            // with more of the terminal wave flipped.
            let f = if b.mu > 0.15 { -0.5 } else { 0.55 };
            add_bump(&mut ch1, fs, sample, b.amp * amp_scale * f, b.mu + 0.004, b.sigma * 1.15);
        }
    }

    // Baseline wander: two slow sinusoids with random phase, plus noise.
    let (p1, p2) = (rng.next_range(0.0, std::f64::consts::TAU), rng.next_range(0.0, std::f64::consts::TAU));
    for i in 0..n {
        let ts = i as f64 / fs;
        let wander = config.wander_mv
            * (0.6 * (std::f64::consts::TAU * 0.21 * ts + p1).sin()
                + 0.4 * (std::f64::consts::TAU * 0.33 * ts + p2).sin());
        ch0[i] += wander + config.noise_mv * rng.next_normal();
        ch1[i] += 0.8 * wander + config.noise_mv * rng.next_normal();
    }

    SynthRecord {
        channels: vec![quantize(&ch0), quantize(&ch1)],
        annotations: beats,
    }
}

/// Adds one Gaussian bump centered `mu` seconds from `center`.
fn add_bump(signal: &mut [f64], fs: f64, center: u64, amp: f64, mu: f64, sigma: f64) {
    let mid = center as f64 + mu * fs;
    let half = (4.0 * sigma * fs).ceil() as i64;
    let mid_i = mid.round() as i64;
    for i in (mid_i - half).max(0)..=(mid_i + half).min(signal.len() as i64 - 1) {
        let dt = (i as f64 - mid) / fs;
        signal[i as usize] += amp * (-0.5 * (dt / sigma).powi(2)).exp();
    }
}

/// mV -> ADC units at gain 200 / baseline 1024, clamped to 12-bit range.
fn quantize(mv: &[f64]) -> Vec<i32> {
    mv.iter()
        .map(|&v| ((v * SYNTH_GAIN).round() as i32 + SYNTH_BASELINE).clamp(-2048, 2047))
        .collect()
}

/// Canned full-length configurations used by the integration and acceptance
/// suites. The names follow the fixture identities checked into the repo:
/// "100" is N-dominant with a sprinkle of atrial prematures, "208" is a
/// heavy ventricular/fusion mix, "106" alternates normal and ventricular
/// runs. Durations are full half-hour records.
pub fn fixture_config(name: &str) -> Option<SynthConfig> {
    let cfg = match name {
        "100" => SynthConfig {
            seed: 0x0100,
            duration_s: 1800.0,
            mean_hr_bpm: 76.0,
            beat_mix: vec![(1, 0.985), (8, 0.014), (5, 0.001)],
            ..SynthConfig::default()
        },
        "208" => SynthConfig {
            seed: 0x0208,
            duration_s: 1800.0,
            mean_hr_bpm: 98.0,
            beat_mix: vec![(1, 0.545), (5, 0.325), (6, 0.125), (13, 0.005)],
            ..SynthConfig::default()
        },
        "106" => SynthConfig {
            seed: 0x0106,
            duration_s: 1800.0,
            mean_hr_bpm: 70.0,
            beat_mix: vec![(1, 0.74), (5, 0.26)],
            ..SynthConfig::default()
        },
        _ => return None,
    };
    Some(cfg)
}

/// Wraps generated channels and annotations in the same structure that
/// loading a record from disk produces, so downstream stages (detection,
/// encoding, evaluation) run identically on synthetic and on-disk data.
pub fn as_record(name: &str, config: &SynthConfig, synth: &SynthRecord) -> EcgRecord {
    let n_samples = synth.channels.first().map_or(0, Vec::len) as u64;
    let signals = (0..synth.channels.len())
        .map(|i| SignalSpec {
            file_name: format!("{name}.dat"),
            lead_name: if i == 0 { "MLII" } else { "V1" }.to_string(),
            ..SignalSpec::default()
        })
        .collect();
    let annotations = synth
        .annotations
        .iter()
        .map(|&(sample, code)| BeatAnnotation {
            sample,
            code,
            symbol: symbol_for_code(code).unwrap_or('?'),
            aami: aami_class_for_code(code).unwrap_or(AamiClass::Unknown),
        })
        .collect();
    EcgRecord {
        header: RecordHeader {
            name: name.to_string(),
            n_signal: synth.channels.len(),
            sampling_rate: config.sampling_rate,
            n_samples,
            signals,
        },
        signals: synth.channels.clone(),
        annotations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn as_record_mirrors_loaded_records() {
        let cfg = SynthConfig { duration_s: 20.0, ..SynthConfig::default() };
        let synth = generate(&cfg);
        let record = as_record("900", &cfg, &synth);
        assert_eq!(record.header.name, "900");
        assert_eq!(record.header.sampling_rate, 360);
        assert_eq!(record.header.n_signal, 2);
        assert_eq!(record.n_samples(), synth.channels[0].len());
        assert_eq!(record.annotations.len(), synth.annotations.len());
        // Calibration must match the quantizer so channel_mv round-trips.
        let mv = record.channel_mv(0);
        let raw = synth.channels[0][100] as f64;
        assert_eq!(mv[100], (raw - 1024.0) / 200.0);
        let first = &record.annotations[0];
        assert_eq!(first.sample, synth.annotations[0].0);
        assert_eq!(first.code, synth.annotations[0].1);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = SynthConfig { duration_s: 10.0, ..SynthConfig::default() };
        let a = generate(&cfg);
        let b = generate(&cfg);
        assert_eq!(a.channels, b.channels);
        assert_eq!(a.annotations, b.annotations);
    }

    #[test]
    fn beat_rate_tracks_the_configured_heart_rate() {
        let cfg = SynthConfig { duration_s: 120.0, mean_hr_bpm: 75.0, ..SynthConfig::default() };
        let rec = generate(&cfg);
        let expected = 120.0 * 75.0 / 60.0;
        let got = rec.annotations.len() as f64;
        assert!((got - expected).abs() < expected * 0.12, "expected ~{expected}, got {got}");
    }

    #[test]
    fn beats_are_strictly_increasing_and_in_range() {
        let cfg = SynthConfig {
            duration_s: 60.0,
            beat_mix: vec![(1, 0.6), (5, 0.2), (8, 0.1), (6, 0.1)],
            ..SynthConfig::default()
        };
        let rec = generate(&cfg);
        let n = rec.channels[0].len() as u64;
        assert!(rec.annotations.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(rec.annotations.iter().all(|&(s, _)| s < n));
    }

    #[test]
    fn r_peak_lands_near_the_annotated_sample() {
        let cfg = SynthConfig { duration_s: 20.0, noise_mv: 0.0, wander_mv: 0.0, ..SynthConfig::default() };
        let rec = generate(&cfg);
        for &(sample, _) in &rec.annotations {
            let s = sample as usize;
            let window = &rec.channels[0][s - 10..s + 11];
            let peak = window.iter().enumerate().max_by_key(|(_, &v)| v).unwrap().0;
            let offset = peak as i64 - 10;
            assert!(offset.abs() <= 2, "R apex {offset} samples from annotation");
        }
    }

    #[test]
    fn mixed_records_contain_every_requested_class() {
        let cfg = SynthConfig {
            duration_s: 300.0,
            beat_mix: vec![(1, 0.5), (5, 0.2), (8, 0.15), (6, 0.1), (12, 0.05)],
            ..SynthConfig::default()
        };
        let rec = generate(&cfg);
        for code in [1u8, 5, 8, 6, 12] {
            assert!(
                rec.annotations.iter().any(|&(_, c)| c == code),
                "class {code} missing from 300 s mixed record"
            );
        }
    }

    #[test]
    fn canned_configs_exist_for_the_fixture_identities() {
        for name in ["100", "208", "106"] {
            assert!(fixture_config(name).is_some());
        }
        assert!(fixture_config("999").is_none());
    }
}
