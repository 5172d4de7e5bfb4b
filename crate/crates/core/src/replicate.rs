//! Deterministic parallel replicates.
//!
//! Replicate `i` always draws from `seed_stream(seed, i)`. Replicates are
//! grouped into fixed chunks, chunks run on the current rayon pool, and
//! the per-chunk results are merged in chunk order, so the output does
//! not depend on the worker count.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::rng::{seed_stream, RandomStream};

pub const CHUNK: u64 = 1024;

fn chunks(replicates: u64) -> Vec<(u64, u64)> {
    (0..replicates.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(replicates)))
        .collect()
}

/// `f(i, stream_i)` for every replicate, in index order.
pub fn map_replicates<T, F>(seed: u64, replicates: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut RandomStream) -> T + Sync,
{
    let parts: Vec<Vec<T>> = chunks(replicates)
        .into_par_iter()
        .map(|(lo, hi)| {
            (lo..hi)
                .map(|i| f(i, &mut seed_stream(seed, i)))
                .collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

/// Folds each chunk from `init()` with `step`, then merges chunks in order.
pub fn fold_replicates<A, I, F, M>(seed: u64, replicates: u64, init: I, step: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, u64, &mut RandomStream) + Sync,
    M: Fn(&mut A, A),
{
    let parts: Vec<A> = chunks(replicates)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut acc = init();
            for i in lo..hi {
                step(&mut acc, i, &mut seed_stream(seed, i));
            }
            acc
        })
        .collect();
    let mut total = init();
    for part in parts {
        merge(&mut total, part);
    }
    total
}

/// Runs `f` on a dedicated pool with `workers` threads.
pub fn with_workers<T, F>(workers: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    if workers == 0 {
        return Err(invalid("workers", "must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid("workers", e.to_string()))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn chunking_covers_everything() {
        assert!(chunks(0).is_empty());
        assert_eq!(chunks(5), vec![(0, 5)]);
        assert_eq!(chunks(2048), vec![(0, 1024), (1024, 2048)]);
        assert_eq!(chunks(2049).last(), Some(&(2048, 2049)));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let run = |w| {
            with_workers(w, || {
                fold_replicates(
                    9,
                    5000,
                    || 0.0f64,
                    |acc, _, rng| *acc += rng.gen::<f64>(),
                    |a, b| *a += b,
                )
            })
            .unwrap()
        };
        let one = run(1);
        assert_eq!(one.to_bits(), run(3).to_bits());
        let mapped = with_workers(2, || map_replicates(9, 3000, |i, rng| (i, rng.gen::<u32>()))).unwrap();
        assert!(mapped.iter().enumerate().all(|(k, (i, _))| k as u64 == *i));
        assert!(with_workers(0, || ()).is_err());
    }
}
