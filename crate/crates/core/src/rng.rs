//! Deterministic random streams: one named seed, one independent ChaCha stream per task.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for task `task` under `seed`. Streams for distinct tasks never overlap,
/// so parallel work is reproducible regardless of scheduling.
pub fn stream(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}
