//! The single random generator used across the crate.
//!
//! xoshiro256** seeded through SplitMix64, so a `u64` seed reproduces the
//! same stream on every platform.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;

pub type Rng = Xoshiro256StarStar;

pub fn seeded(seed: u64) -> Rng {
    Xoshiro256StarStar::seed_from_u64(seed)
}
