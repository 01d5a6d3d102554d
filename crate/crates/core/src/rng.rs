//! Seed handling. Every random draw in the crate comes from an explicitly
//! seeded ChaCha stream so results are reproducible and thread-count
//! independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for a top-level seed.
pub fn from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for sub-task `task` of a job seeded with `seed`.
pub fn for_task(seed: u64, task: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task.wrapping_add(1));
    rng
}
