// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded random number generation.
//!
//! All randomness in the crate flows through [`seeded_rng`]: a ChaCha8 stream
//! keyed by a `u64`. Gaussian draws use the ziggurat sampler of `rand_distr`
//! (`StandardNormal`). Both are portable and produce the same stream on every
//! platform for a fixed crate version.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed from `(base, index)` with a SplitMix64
/// finalizer, so that replication `i` gets the same seed regardless of which
/// worker runs it.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(0x9E37_79B9_7F4A_7C15_u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
