//! Deterministic random-number plumbing.
//!
//! Every Monte Carlo routine derives one ChaCha stream per replica from a
//! single root seed. Replica `r` always sees the same stream regardless of
//! how replicas are scheduled across threads, so parallel and serial runs
//! produce identical results for any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// The generator for stream `stream` of root seed `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `reps` independent replicas in parallel, replica `r` drawing from
/// `substream(seed, offset + r)`. Results are returned in replica order, so
/// any later aggregation is independent of the parallel schedule.
pub fn run_replicas<T, F>(seed: u64, offset: u64, reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> T + Sync,
{
    (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, offset + r);
            f(r, &mut rng)
        })
        .collect()
}
