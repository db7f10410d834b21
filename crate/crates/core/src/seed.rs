//! Deterministic seed derivation.
//!
//! Every randomized stage of the pipeline (fold shuffling, model
//! initialization, restarts, reruns) draws from its own ChaCha8 stream whose
//! seed is derived from a single master seed and a stage index. Derivation is
//! a pure function, so results do not depend on execution order or thread
//! count, and changing one stage's stream does not perturb any other.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives a child seed from a parent seed and a stream index.
///
/// This is the SplitMix64 finalizer applied to the pair; it decorrelates
/// nearby `(seed, stream)` inputs so that stream 0 and stream 1 of the same
/// parent share no observable structure.
#[must_use]
pub fn mix(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Creates the RNG used throughout the crate for a given derived seed.
#[must_use]
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
