//! Seeded 64-bit generator used by the scene generator.
//!
//! This is the SplitMix64 sequence. It is tiny, fast, and — unlike a
//! third-party RNG — frozen here bit-exactly so scene generation stays
//! byte-reproducible across releases and across reimplementations in
//! other languages. Every derived draw below is part of that contract:
//!
//! - `next_u64`: `state += 0x9E3779B97F4A7C15`, then mix with the two
//!   multiply-xorshift rounds given in the code.
//! - `next_f64`: top 53 bits of `next_u64`, scaled by 2^-53, in `[0, 1)`.
//! - `next_range(lo, hi)`: `lo + (hi - lo) * next_f64()`.
//! - `next_below(n)`: `next_u64() % n` (the modulo bias is accepted and
//!   part of the contract).
//! - `next_gaussian(sigma)`: Box-Muller from two uniforms `u1, u2`:
//!   `sigma * sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`. The sine partner is
//!   discarded; each call consumes exactly two `next_u64` draws.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform draw in `0..n`. `n` must be non-zero.
    pub fn next_below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    /// Zero-mean gaussian draw with standard deviation `sigma`.
    pub fn next_gaussian(&mut self, sigma: f64) -> f64 {
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        sigma * (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// In-place Fisher-Yates shuffle: for `i` from `len-1` down to 1,
    /// swap `items[i]` with `items[next_below(i+1)]`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
