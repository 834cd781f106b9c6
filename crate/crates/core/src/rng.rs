//! The single seeded generator family used across the crate.
//!
//! Every random draw (synthetic noise, bootstrap resamples, subsampling,
//! Latin-sampled starts) comes from ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`, so a seed plus input order fixes the output
//! on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
