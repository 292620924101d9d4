//! The five signal-conditioning stages, all at the 200 Hz working rate.
//!
//! Each stage is causal; its output at index `n` reflects the input at
//! index `n - delay`, with the per-stage delays exported as constants so
//! the detector can map integrated-peak positions back to signal time.

/// Working sample rate the stages are designed for.
pub const WORKING_RATE: u32 = 200;

/// Group delay of [`lowpass`] in working-rate samples.
pub const LOWPASS_DELAY: usize = 5;
/// Group delay of [`highpass`] in working-rate samples.
pub const HIGHPASS_DELAY: usize = 16;
/// Group delay of [`bandpass`] (low-pass then high-pass).
pub const BANDPASS_DELAY: usize = LOWPASS_DELAY + HIGHPASS_DELAY;
/// Group delay of [`derivative`].
pub const DERIVATIVE_DELAY: usize = 2;
/// Window length of [`moving_window_integral`]: 150 ms at 200 Hz.
pub const MWI_WINDOW: usize = 30;
/// Effective delay of the moving-window integral (half window, rounded up).
pub const MWI_DELAY: usize = 15;
/// Delay from raw input to the integrated envelope.
pub const TOTAL_DELAY: usize = BANDPASS_DELAY + DERIVATIVE_DELAY + MWI_DELAY;

/// Linearly resamples `signal` from `fs` Hz to the 200 Hz working rate.
///
/// Output index `n` reads the input at position `n * fs / 200`, linearly
/// interpolated; a constant signal stays exactly constant. For the
/// database's native 360 Hz this is the 5/9 ratio. When `fs` is already
/// 200 the signal is returned unchanged.
pub fn resample_to_200(signal: &[f64], fs: u32) -> Vec<f64> {
    assert!(fs > 0, "sampling rate must be positive");
    if fs == WORKING_RATE {
        return signal.to_vec();
    }
    if signal.is_empty() {
        return Vec::new();
    }
    let ratio = fs as f64 / WORKING_RATE as f64;
    let out_len = ((signal.len() - 1) as f64 / ratio).floor() as usize + 1;
    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len {
        let pos = n as f64 * ratio;
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        let a = signal[i];
        // `a + (b - a) * frac` rather than `a*(1-frac) + b*frac`: constants
        // and offsets pass through exactly.
        let v = if frac == 0.0 { a } else { a + (signal[i + 1] - a) * frac };
        out.push(v);
    }
    out
}

/// Maps a working-rate index back to the nearest native-rate index.
pub fn working_to_native(index: usize, fs: u32) -> usize {
    (index as f64 * fs as f64 / WORKING_RATE as f64).round() as usize
}

/// Second-order low-pass, cutoff ~11 Hz, DC gain 36, delay 5:
/// `y(n) = 2y(n-1) - y(n-2) + x(n) - 2x(n-6) + x(n-12)`.
pub fn lowpass(x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    for n in 0..x.len() {
        let mut v = x[n];
        if n >= 1 {
            v += 2.0 * y[n - 1];
        }
        if n >= 2 {
            v -= y[n - 2];
        }
        if n >= 6 {
            v -= 2.0 * x[n - 6];
        }
        if n >= 12 {
            v += x[n - 12];
        }
        y[n] = v;
    }
    y
}

/// High-pass, cutoff ~5 Hz, passband gain 32, delay 16, built as an
/// all-pass minus a 32-point running sum:
/// `p(n) = p(n-1) + x(n) - x(n-32); y(n) = 32x(n-16) - p(n)`.
///
/// Rejects DC exactly once the running sum has filled (32 samples).
pub fn highpass(x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    let mut p = 0.0;
    for n in 0..x.len() {
        p += x[n];
        if n >= 32 {
            p -= x[n - 32];
        }
        let delayed = if n >= 16 { x[n - 16] } else { 0.0 };
        y[n] = 32.0 * delayed - p;
    }
    y
}

/// [`lowpass`] followed by [`highpass`]: the 5–11 Hz QRS energy band.
pub fn bandpass(x: &[f64]) -> Vec<f64> {
    highpass(&lowpass(x))
}

/// Five-point derivative, gain 1/8, delay 2:
/// `y(n) = (2x(n) + x(n-1) - x(n-3) - 2x(n-4)) / 8`.
///
/// On a unit-slope ramp the output settles to exactly 1.25.
pub fn derivative(x: &[f64]) -> Vec<f64> {
    let at = |i: Option<usize>| i.map_or(0.0, |i| x[i]);
    (0..x.len())
        .map(|n| {
            (2.0 * x[n] + at(n.checked_sub(1)) - at(n.checked_sub(3)) - 2.0 * at(n.checked_sub(4)))
                / 8.0
        })
        .collect()
}

/// Point-wise squaring: rectifies and emphasizes large slopes.
pub fn square(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v * v).collect()
}

/// 150 ms moving-window average (30 samples at 200 Hz), implemented as a
/// running sum. Early outputs average over the samples seen so far.
pub fn moving_window_integral(x: &[f64]) -> Vec<f64> {
    let mut y = Vec::with_capacity(x.len());
    let mut sum = 0.0;
    for n in 0..x.len() {
        sum += x[n];
        if n >= MWI_WINDOW {
            sum -= x[n - MWI_WINDOW];
        }
        y.push(sum / MWI_WINDOW.min(n + 1) as f64);
    }
    y
}
