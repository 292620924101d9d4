//! Adaptive-threshold peak walking over the integrated envelope.

use super::stages::{
    bandpass, derivative, moving_window_integral, resample_to_200, square, working_to_native,
    BANDPASS_DELAY, DERIVATIVE_DELAY, MWI_DELAY, WORKING_RATE,
};
use super::QrsError;
use crate::wfdb::EcgRecord;

/// Tunables for [`detect_qrs`]. The defaults are the published values.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Seconds of signal used to seed the signal/noise levels.
    pub learning_s: f64,
    /// Refractory period in milliseconds; no two detections can be closer.
    pub refractory_ms: f64,
    /// Running-average update weight for peak levels (`0.125` — an eighth
    /// of the new peak, seven eighths of the old level).
    pub level_update: f64,
    /// Position of the detection threshold between noise and signal levels.
    pub threshold_mix: f64,
    /// Search-back triggers when no QRS arrives within this multiple of
    /// the running average RR interval.
    pub searchback_rr_factor: f64,
    /// Search-back threshold as a fraction of the primary threshold.
    pub searchback_threshold_ratio: f64,
    /// Half-width, in milliseconds, of the window used to refine each peak
    /// against the band-passed waveform.
    pub refine_ms: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            learning_s: 2.0,
            refractory_ms: 200.0,
            level_update: 0.125,
            threshold_mix: 0.25,
            searchback_rr_factor: 1.66,
            searchback_threshold_ratio: 0.5,
            refine_ms: 40.0,
        }
    }
}

/// One detected QRS complex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// R-peak position in native-rate samples.
    pub sample: u64,
    /// Height of the integrated-envelope peak that triggered the
    /// detection; a relative confidence measure, not calibrated.
    pub peak: f64,
}

/// Runs the detector over channel 0 of a record (raw ADC units; the
/// detector is scale- and offset-invariant so no millivolt conversion is
/// needed).
pub fn detect_qrs_record(record: &EcgRecord, config: &DetectorConfig) -> Result<Vec<Detection>, QrsError> {
    let signal: Vec<f64> = record.signals[0].iter().map(|&s| s as f64).collect();
    detect_qrs(&signal, record.header.sampling_rate, config)
}

/// Detects QRS complexes in `signal` sampled at `fs` Hz, returning
/// native-rate R-peak positions in increasing order.
pub fn detect_qrs(signal: &[f64], fs: u32, config: &DetectorConfig) -> Result<Vec<Detection>, QrsError> {
    if signal.is_empty() {
        return Err(QrsError::EmptyInput);
    }
    let needed = (config.learning_s * fs as f64).ceil() as usize;
    if signal.len() < needed {
        return Err(QrsError::TooShort { needed, got: signal.len() });
    }

    let x = resample_to_200(signal, fs);
    let bp = bandpass(&x);
    let mwi = moving_window_integral(&square(&derivative(&bp)));

    // --- learning phase: seed levels from the first stretch of envelope ---
    // The first WARMUP samples mix in the filters' zero initial state and
    // are excluded from both learning and peak picking; otherwise a large
    // constant offset shows up as a huge start-up transient.
    let learn = (config.learning_s * WORKING_RATE as f64) as usize;
    let learn_slice = &mwi[WARMUP..learn.min(mwi.len())];
    let mut spk = learn_slice.iter().cloned().fold(f64::MIN, f64::max);
    let mut npk = learn_slice.iter().sum::<f64>() / learn_slice.len() as f64;
    let refractory = (config.refractory_ms / 1000.0 * WORKING_RATE as f64).round() as usize;

    let threshold1 = |spk: f64, npk: f64| npk + config.threshold_mix * (spk - npk);

    // --- collect envelope peaks, one candidate per complex ----------------
    // A single QRS produces several envelope lobes (the derivative has one
    // per slope); consolidating maxima closer than the refractory window
    // keeps only the tallest lobe of each complex.
    let peaks = consolidate_peaks(envelope_peaks(&mwi), refractory);

    // --- walk the peaks with adaptive thresholds --------------------------
    let mut qrs: Vec<(usize, f64)> = Vec::new(); // (mwi index, peak height)
    let mut rr_history: Vec<f64> = Vec::new();
    let mut searched_from = 0usize; // resume point for search-back scans

    let mut i = 0;
    while i < peaks.len() {
        let (idx, height) = peaks[i];

        // Search-back: if the expected beat is overdue, rescan the gap at
        // half threshold and take the tallest qualifying peak.
        if let (Some(&(last_idx, _)), false) = (qrs.last(), rr_history.is_empty()) {
            let rr_avg = rr_history.iter().sum::<f64>() / rr_history.len() as f64;
            if (idx - last_idx) as f64 > config.searchback_rr_factor * rr_avg {
                let t2 = config.searchback_threshold_ratio * threshold1(spk, npk);
                let candidate = peaks[searched_from..i]
                    .iter()
                    .filter(|&&(p, h)| p > last_idx + refractory && h >= t2)
                    .cloned()
                    .max_by(|a, b| a.1.total_cmp(&b.1));
                if let Some((p, h)) = candidate {
                    spk = config.level_update * h + (1.0 - config.level_update) * spk;
                    push_rr(&mut rr_history, (p - last_idx) as f64);
                    qrs.push((p, h));
                }
                searched_from = i;
            }
        }

        let within_refractory = qrs.last().is_some_and(|&(last, _)| idx < last + refractory);
        if !within_refractory && height >= threshold1(spk, npk) {
            if let Some(&(last, _)) = qrs.last() {
                push_rr(&mut rr_history, (idx - last) as f64);
            }
            spk = config.level_update * height + (1.0 - config.level_update) * spk;
            qrs.push((idx, height));
        } else {
            npk = config.level_update * height + (1.0 - config.level_update) * npk;
        }
        i += 1;
    }

    // --- delay correction and native-rate refinement ----------------------
    let refine = (config.refine_ms / 1000.0 * WORKING_RATE as f64).round() as usize;
    let mut detections: Vec<Detection> = Vec::with_capacity(qrs.len());
    for (idx, height) in qrs {
        // The envelope lags the band-passed signal by the derivative and
        // integration delays; the band-passed signal lags the input by the
        // filter cascade delay.
        let bp_center = idx.saturating_sub(DERIVATIVE_DELAY + MWI_DELAY);
        let lo = bp_center.saturating_sub(refine);
        let hi = (bp_center + refine + 1).min(bp.len());
        let best = (lo..hi)
            .max_by(|&a, &b| bp[a].abs().total_cmp(&bp[b].abs()))
            .unwrap_or(bp_center);
        let working_index = best.saturating_sub(BANDPASS_DELAY);
        let native = working_to_native(working_index, fs).min(signal.len() - 1);
        detections.push(Detection { sample: native as u64, peak: height });
    }

    // Delay correction can reorder detections that were at the refractory
    // edge; restore order and drop any that collapsed onto one sample.
    detections.sort_by_key(|d| d.sample);
    detections.dedup_by_key(|d| d.sample);
    Ok(detections)
}

/// Working-rate samples before which the filter cascade is still filling
/// its zero-initialized history (low-pass 11 + high-pass 32 + derivative 5
/// + integration 30, with margin).
const WARMUP: usize = 80;

/// Local maxima of the envelope: strictly rising into the peak, falling or
/// flat after. A flat-zero signal has no peaks.
fn envelope_peaks(mwi: &[f64]) -> Vec<(usize, f64)> {
    let mut peaks = Vec::new();
    for n in WARMUP.max(1)..mwi.len().saturating_sub(1) {
        if mwi[n] > mwi[n - 1] && mwi[n] >= mwi[n + 1] {
            peaks.push((n, mwi[n]));
        }
    }
    peaks
}

/// Collapses runs of nearby maxima to their tallest member: a peak closer
/// than `window` to the previous kept peak either replaces it (if taller)
/// or is dropped.
fn consolidate_peaks(peaks: Vec<(usize, f64)>, window: usize) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(peaks.len());
    for (p, h) in peaks {
        match out.last_mut() {
            Some(last) if p - last.0 < window => {
                if h > last.1 {
                    *last = (p, h);
                }
            }
            _ => out.push((p, h)),
        }
    }
    out
}

/// Keeps the running average over the last eight RR intervals.
fn push_rr(history: &mut Vec<f64>, rr: f64) {
    history.push(rr);
    if history.len() > 8 {
        history.remove(0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Train of identical Gaussian pulses: the canonical easy input.
    fn pulse_train(fs: u32, duration_s: f64, period_s: f64, amp: f64) -> (Vec<f64>, Vec<u64>) {
        let n = (duration_s * fs as f64) as usize;
        let mut x = vec![0.0; n];
        let mut centers = Vec::new();
        let sigma = 0.02 * fs as f64;
        let mut t = period_s;
        while t < duration_s - 0.5 {
            let c = (t * fs as f64).round() as usize;
            centers.push(c as u64);
            let half = (4.0 * sigma) as usize;
            for i in c.saturating_sub(half)..(c + half).min(n) {
                let d = (i as f64 - c as f64) / sigma;
                x[i] += amp * (-0.5 * d * d).exp();
            }
            t += period_s;
        }
        (x, centers)
    }

    fn assert_all_within(detections: &[Detection], centers: &[u64], tol: u64) {
        assert_eq!(
            detections.len(),
            centers.len(),
            "want {} detections, got {}",
            centers.len(),
            detections.len()
        );
        for (d, &c) in detections.iter().zip(centers) {
            let err = d.sample.abs_diff(c);
            assert!(err <= tol, "detection at {} vs pulse at {c} (err {err})", d.sample);
        }
    }

    #[test]
    fn detects_every_pulse_of_a_clean_train_at_360hz() {
        let (x, centers) = pulse_train(360, 30.0, 0.8, 1.0);
        let d = detect_qrs(&x, 360, &DetectorConfig::default()).unwrap();
        // ±20 ms at 360 Hz.
        assert_all_within(&d, &centers, 8);
    }

    #[test]
    fn detects_at_the_working_rate_without_resampling() {
        let (x, centers) = pulse_train(200, 30.0, 0.75, 1.0);
        let d = detect_qrs(&x, 200, &DetectorConfig::default()).unwrap();
        assert_all_within(&d, &centers, 4);
    }

    #[test]
    fn detection_is_scale_invariant() {
        let (x, _) = pulse_train(360, 20.0, 0.8, 1.0);
        let scaled: Vec<f64> = x.iter().map(|v| v * 3.7).collect();
        let a = detect_qrs(&x, 360, &DetectorConfig::default()).unwrap();
        let b = detect_qrs(&scaled, 360, &DetectorConfig::default()).unwrap();
        assert_eq!(
            a.iter().map(|d| d.sample).collect::<Vec<_>>(),
            b.iter().map(|d| d.sample).collect::<Vec<_>>()
        );
    }

    #[test]
    fn detection_is_offset_invariant() {
        let (x, _) = pulse_train(360, 20.0, 0.8, 1.0);
        let offset: Vec<f64> = x.iter().map(|v| v + 500.0).collect();
        let a = detect_qrs(&x, 360, &DetectorConfig::default()).unwrap();
        let b = detect_qrs(&offset, 360, &DetectorConfig::default()).unwrap();
        assert_eq!(
            a.iter().map(|d| d.sample).collect::<Vec<_>>(),
            b.iter().map(|d| d.sample).collect::<Vec<_>>()
        );
    }

    #[test]
    fn flat_zero_yields_no_detections() {
        let x = vec![0.0; 3600];
        let d = detect_qrs(&x, 360, &DetectorConfig::default()).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn short_records_are_rejected() {
        let err = detect_qrs(&vec![0.0; 360], 360, &DetectorConfig::default()).unwrap_err();
        assert!(matches!(err, QrsError::TooShort { .. }), "{err:?}");
        let err = detect_qrs(&[], 360, &DetectorConfig::default()).unwrap_err();
        assert!(matches!(err, QrsError::EmptyInput), "{err:?}");
    }

    #[test]
    fn no_two_detections_within_the_refractory_period() {
        // Pulses 150 ms apart are physiologically impossible; whatever the
        // detector does, it must respect the 200 ms spacing floor.
        let (x, _) = pulse_train(360, 20.0, 0.15, 1.0);
        let d = detect_qrs(&x, 360, &DetectorConfig::default()).unwrap();
        assert!(!d.is_empty());
        let min_gap = (0.2 * 360.0) as u64 - 2; // delay refinement jitter
        for w in d.windows(2) {
            assert!(w[1].sample - w[0].sample >= min_gap, "{} then {}", w[0].sample, w[1].sample);
        }
    }

    #[test]
    fn searchback_recovers_an_attenuated_beat() {
        let (mut x, centers) = pulse_train(360, 30.0, 0.8, 1.0);
        // Knock one mid-train pulse down to 45% amplitude: squaring puts
        // its envelope peak at ~20% — below the primary threshold once the
        // signal level has adapted, but above the half-threshold that the
        // search-back pass applies.
        let victim = centers[centers.len() / 2] as usize;
        let half = (4.0 * 0.02 * 360.0) as usize;
        for v in x[victim - half..victim + half].iter_mut() {
            *v *= 0.45;
        }
        let d = detect_qrs(&x, 360, &DetectorConfig::default()).unwrap();
        assert_all_within(&d, &centers, 8);
    }
}
