//! Counter-based pseudo-randomness keyed by edge identity.
//!
//! Every capacity draw is a pure function of
//! `(master_seed, replica, edge coordinates, axis)`. Distinct replicas are
//! independent streams, and the value attached to a lattice edge does not
//! depend on the region it is enumerated in, so environments over different
//! regions are automatically coupled on their common edges.
//!
//! The scheme, bit-exactly: starting from `h = 0x9E3779B97F4A7C15`, fold in
//! each key word `w` as `h = splitmix64(h ^ w)`, where `splitmix64` is the
//! finalizer of Steele, Lea and Flood's SplitMix64 generator. Key words are,
//! in order: the master seed, the replica index, the `d` signed coordinates
//! of the lower edge endpoint (two's complement), and the axis. The final
//! 64-bit state maps to a uniform in the open interval (0, 1) via
//! `(h >> 11) * 2^-53`, with 0 mapped to the smallest positive step.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of key words into a single 64-bit hash.
pub fn mix_words(words: &[u64]) -> u64 {
    let mut h = GOLDEN;
    for &w in words {
        h = splitmix64(h ^ w);
    }
    h
}

/// Uniform draw in (0, 1) keyed by `(master_seed, replica, point, axis)`.
pub fn edge_uniform(master_seed: u64, replica: u64, point: &[i64], axis: usize) -> f64 {
    let mut h = GOLDEN;
    h = splitmix64(h ^ master_seed);
    h = splitmix64(h ^ replica);
    for &c in point {
        h = splitmix64(h ^ (c as u64));
    }
    h = splitmix64(h ^ (axis as u64));
    u64_to_open_unit(h)
}

/// Maps a 64-bit word to the open interval (0, 1).
#[inline]
pub fn u64_to_open_unit(h: u64) -> f64 {
    let u = ((h >> 11) as f64) * (1.0 / (1u64 << 53) as f64);
    if u <= 0.0 {
        f64::MIN_POSITIVE
    } else {
        u
    }
}

/// A small deterministic stream for non-edge randomness (test sampling,
/// direction jitter). Sequential SplitMix64.
#[derive(Debug, Clone)]
pub struct SplitMix {
    state: u64,
}

impl SplitMix {
    pub fn new(seed: u64) -> Self {
        SplitMix { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        u64_to_open_unit(self.next_u64())
    }

    /// Uniform integer in `[0, bound)`.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.next_u64() % bound
    }
}
