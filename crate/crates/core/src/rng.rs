//! Reproducible random sub-streams.
//!
//! Every worker draws from `ChaCha8` keyed by the run seed, with the worker
//! index selecting the stream. Output is therefore a function of
//! `(seed, index)` only, independent of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for sub-stream `stream` of run `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Splits `count` items over `parts` workers; the first `count % parts` get one extra.
pub fn partition(count: usize, parts: usize) -> Vec<usize> {
    let parts = parts.max(1);
    (0..parts).map(|k| count / parts + usize::from(k < count % parts)).collect()
}
