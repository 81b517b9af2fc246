//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit `&mut impl Rng`; decodes build
//! theirs from the configured seed so traces are bit-reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type DecodeRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> DecodeRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for item `index` of a batch run: `seed XOR index`.
pub fn stream(seed: u64, index: u64) -> DecodeRng {
    seeded(seed ^ index)
}
