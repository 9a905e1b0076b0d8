//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator whose seed is
//! derived from a master seed and a stream index, so Monte Carlo loops give
//! the same numbers whether they run on one thread or many.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines a master seed and a stream index into a child seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Generator for stream `index` of `master`.
pub fn stream(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}

/// Domain tags so that unrelated consumers of one master seed never share a stream.
pub(crate) mod tag {
    pub const FUNCTIONALS: u64 = 0x0F0F_0001;
    pub const GAUSSIAN_MC: u64 = 0x0F0F_0002;
    pub const RADEMACHER_MC: u64 = 0x0F0F_0003;
    pub const SHUFFLE: u64 = 0x0F0F_0004;
    pub const TRIAL: u64 = 0x0F0F_0005;
    pub const BOUND_SAMPLE: u64 = 0x0F0F_0006;
}
