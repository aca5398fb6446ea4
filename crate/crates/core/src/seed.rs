//! Seed derivation.
//!
//! Every random stream in the crate comes from one user-supplied seed:
//!
//! - cross-validation fold `i` runs its pipeline with `seed + i`;
//! - forest tree `i` draws its bootstrap and feature samples from `seed + i`;
//! - tuning trial `t` samples its configuration from `seed + t`, and its
//!   objective is evaluated with the same derived seed.
//!
//! Additions wrap. Each derived seed is expanded by [`rng`] into a ChaCha8
//! stream, so neighbouring seeds give unrelated streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derive(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}
