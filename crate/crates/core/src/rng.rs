//! Reproducible random streams.
//!
//! Work is cut into fixed-size batches whose boundaries depend only on the
//! sample count. Batch `i` draws from a ChaCha stream seeded with an
//! avalanche mix of `(master_seed, i)`, so results do not depend on how many
//! worker threads process the batches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Random stream type used by every sampler in the crate.
pub type Stream = ChaCha8Rng;

/// Samples per batch.
pub const BATCH_SIZE: usize = 2048;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of substream `index` under `master`.
pub fn substream_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

pub fn substream(master: u64, index: u64) -> Stream {
    Stream::seed_from_u64(substream_seed(master, index))
}

/// Batch lengths for `samples` draws; a pure function of `samples`.
pub fn batch_lengths(samples: usize) -> Vec<usize> {
    let full = samples / BATCH_SIZE;
    let mut out = vec![BATCH_SIZE; full];
    if samples % BATCH_SIZE != 0 {
        out.push(samples % BATCH_SIZE);
    }
    out
}

/// Runs `work(stream, len)` for every batch in parallel and returns the
/// results in batch order.
pub fn map_batches<T, F>(samples: usize, seed: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Stream, usize) -> T + Sync,
{
    batch_lengths(samples)
        .into_par_iter()
        .enumerate()
        .map(|(i, len)| {
            let mut rng = substream(seed, i as u64);
            work(&mut rng, len)
        })
        .collect()
}
