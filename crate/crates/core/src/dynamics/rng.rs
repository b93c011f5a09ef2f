//! Deterministic counter-based random number generator.
//!
//! This is SplitMix64: output `i` is a fixed 64-bit mixing function
//! (Stafford's MurmurHash3 variant 13) applied to `seed + i*gamma`, where
//! `gamma` is an odd increment. The generator is pure 64-bit integer
//! arithmetic, so identical seeds give bit-identical streams on every
//! platform. `split` derives a child stream with an independent seed and
//! a freshly mixed odd gamma, following the splittable-generator
//! construction of Steele, Lea and Flood, so parallel chains never share
//! a subsequence.

/// Default increment: 2^64 / golden ratio, the canonical SplitMix64 gamma.
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stafford variant 13 of the 64-bit finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stafford variant 13 with different constants, used to derive gammas.
#[inline]
fn mix64_variant(mut z: u64) -> u64 {
    z = (z ^ (z >> 33)).wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    z = (z ^ (z >> 33)).wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    z ^ (z >> 33)
}

/// Derive an odd gamma with enough bit transitions from raw entropy.
#[inline]
fn mix_gamma(z: u64) -> u64 {
    let g = mix64_variant(z) | 1;
    if (g ^ (g >> 1)).count_ones() < 24 {
        g ^ 0xAAAA_AAAA_AAAA_AAAA
    } else {
        g
    }
}

/// Counter-based SplitMix64 stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    counter: u64,
    gamma: u64,
}

impl RngStream {
    /// Stream seeded with `seed` and the canonical increment.
    pub fn new(seed: u64) -> Self {
        Self {
            counter: seed,
            gamma: GOLDEN_GAMMA,
        }
    }

    /// Next 64-bit output.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(self.gamma);
        mix64(self.counter)
    }

    /// Child stream with an independent seed and its own odd increment.
    pub fn split(&mut self) -> Self {
        let seed = self.next_u64();
        let gamma = mix_gamma(self.next_u64());
        Self {
            counter: seed,
            gamma,
        }
    }

    /// Uniform f64 in `[0, 1)` from the top 53 bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform scalar in `[0, 1)`.
    #[inline]
    pub fn next_unit<F: crate::scalar::Real>(&mut self) -> F {
        F::of(self.next_f64())
    }

    /// Uniform u64 in `[0, bound)` by rejection (no modulo bias).
    #[inline]
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % bound;
            }
        }
    }

    /// Uniform usize in `[0, bound)`.
    #[inline]
    pub fn next_usize_below(&mut self, bound: usize) -> usize {
        self.next_below(bound as u64) as usize
    }
}
