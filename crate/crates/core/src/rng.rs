//! Seeded random streams.
//!
//! Every realization, surrogate or grid cell draws from its own stream
//! `seed ^ index`, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream for member `index` of a family rooted at `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index)
}
