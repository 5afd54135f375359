//! Deterministic random substreams.
//!
//! Every entity draws from its own PCG64 stream seeded with a SplitMix64 hash
//! of `(seed, kind, index)`, so adding drivers never moves task coordinates
//! and the output does not depend on draw order across entities.

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

/// Stream families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamKind {
    Task = 1,
    Driver = 2,
    Pair = 3,
    Dataset = 4,
    Holdout = 5,
}

/// One SplitMix64 output for state `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn substream_seed(seed: u64, kind: StreamKind, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ kind as u64) ^ index)
}

pub fn substream(seed: u64, kind: StreamKind, index: u64) -> Pcg64 {
    Pcg64::seed_from_u64(substream_seed(seed, kind, index))
}

/// `lo + (hi - lo) u` with `u` uniform on `[0, 1)` from 53 random bits.
pub fn uniform(rng: &mut Pcg64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference generator seeded with 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn streams_are_independent_of_each_other() {
        let a: Vec<f64> = (0..4).map(|_| uniform(&mut substream(7, StreamKind::Task, 3), 0.0, 1.0)).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let b = uniform(&mut substream(7, StreamKind::Driver, 3), 0.0, 1.0);
        assert_ne!(a[0], b);
    }

    #[test]
    fn uniform_range() {
        let mut r = substream(1, StreamKind::Dataset, 0);
        for _ in 0..10_000 {
            let v = uniform(&mut r, 0.5, 2.0);
            assert!((0.5..2.0).contains(&v));
        }
    }
}
