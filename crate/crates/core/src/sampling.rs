//! Chunked, seed-derived parallel sampling.
//!
//! Work is cut into fixed-size chunks and chunk `k` draws from a ChaCha8
//! stream keyed by `(seed, k)`. Results are concatenated in chunk order, so
//! the output depends only on the seed and the sample count, never on how
//! many worker threads rayon happens to use.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub(crate) const CHUNK: usize = 4096;

pub(crate) fn chunk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `f(rng, len)` over `n` samples split into chunks and returns the
/// per-chunk results in order. `stream_base` separates independent sample
/// sets drawn under one seed.
pub(crate) fn par_chunks<T, F>(n: usize, seed: u64, stream_base: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let len = CHUNK.min(n - k * CHUNK);
            let mut rng = chunk_rng(seed, stream_base + k as u64);
            f(&mut rng, len)
        })
        .collect()
}
