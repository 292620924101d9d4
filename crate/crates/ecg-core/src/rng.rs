//! Deterministic random number generation.
//!
//! Every randomized step in this crate (weight initialization, dataset
//! shuffling, noise synthesis, quota filling) draws from [`DetRng`] so that a
//! seed pins the entire pipeline. The generator is deliberately simple and
//! fully documented, making the streams reproducible from any language:
//!
//! - The raw stream is SplitMix64: the state advances by the constant
//!   `0x9E3779B97F4A7C15` and the output is the finalizer
//!   `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
//!    z *= 0x94D049BB133111EB; z ^= z >> 31` applied to the new state.
//! - `next_f64` takes the top 53 bits of `next_u64`, scaled into `[0, 1)`.
//! - Standard normal variates come from the Box-Muller transform (no
//!   ziggurat, no rejection): with `u1 = 1 - next_f64()` in `(0, 1]` and
//!   `u2 = next_f64()`, the pair is `r*cos(2*pi*u2)` and `r*sin(2*pi*u2)`
//!   where `r = sqrt(-2*ln(u1))`. The cosine variate is returned first and
//!   the sine variate on the following call.

/// Deterministic generator: SplitMix64 stream plus derived transforms.
#[derive(Debug, Clone)]
pub struct DetRng {
    state: u64,
    /// Second Box-Muller variate held over for the next `next_normal` call.
    spare_normal: Option<f64>,
}

impl DetRng {
    /// Creates a generator whose entire output is determined by `seed`.
    pub fn new(seed: u64) -> Self {
        DetRng { state: seed, spare_normal: None }
    }

    /// Next raw 64-bit value of the SplitMix64 stream.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform value in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform value in `[lo, hi)`.
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, n)` via the multiply-shift reduction
    /// `(next_u64() * n) >> 64`. The residual bias is below 2^-64 per draw,
    /// irrelevant here; what matters is that the mapping is fixed.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below requires a nonempty range");
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Standard normal variate via Box-Muller (see module docs).
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.next_f64(); // (0, 1]: keeps ln() finite
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// In-place Fisher-Yates shuffle, iterating from the last index down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// Derives an independent child generator; used to give parallel or
    /// per-item work its own stream (e.g. seed ^ item index fed back in).
    pub fn derive(&self, stream: u64) -> DetRng {
        let mut mixer = DetRng::new(self.state ^ stream);
        // Burn one output so derive(0) does not alias the parent state.
        let s = mixer.next_u64();
        DetRng::new(s)
    }
}
