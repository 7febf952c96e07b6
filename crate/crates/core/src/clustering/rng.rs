//! The seeding generator used by K-means.
//!
//! State is initialised with one SplitMix64 step of the seed (a zero result is
//! replaced by `0x9E3779B97F4A7C15`). Each draw is xorshift64*:
//!
//! ```text
//! x ^= x >> 12; x ^= x << 25; x ^= x >> 27;
//! out = x * 0x2545F4914F6CDD1D   (wrapping)
//! ```
//!
//! `next_f64` takes the top 53 bits of `out` scaled by 2⁻⁵³, giving `[0, 1)`.
//! `below(n)` is `(out as u128 * n) >> 64`.

#[derive(Clone, Debug)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        if z == 0 {
            z = 0x9E37_79B9_7F4A_7C15;
        }
        Self { state: z }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`; `n` must be nonzero.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sequence() {
        // Frozen from the documented recurrence; any change breaks cross-implementation seeding.
        let mut rng = XorShift64Star::new(0);
        let first: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        let mut again = XorShift64Star::new(0);
        assert_eq!(first, (0..3).map(|_| again.next_u64()).collect::<Vec<_>>());
        assert_eq!(first, REFERENCE_SEED0);
    }

    // Computed with an independent big-integer transcription of the recurrence.
    const REFERENCE_SEED0: [u64; 3] = [8916199331640804048, 16032783972208265725, 12954103179475586193];

    #[test]
    fn ranges() {
        let mut rng = XorShift64Star::new(42);
        for _ in 0..10_000 {
            let f = rng.next_f64();
            assert!((0.0..1.0).contains(&f));
            assert!(rng.below(7) < 7);
        }
    }

    #[test]
    fn seeds_differ() {
        assert_ne!(XorShift64Star::new(1).next_u64(), XorShift64Star::new(2).next_u64());
    }
}
