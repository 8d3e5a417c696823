//! Counter-addressed random streams and the deterministic parallel trial loop.
//!
//! A master seed is expanded into a ChaCha key per *domain* (one domain per
//! kind of experiment), and trial `t` draws from ChaCha stream number `t`
//! under that key. Trials are processed in fixed-size chunks whose partial
//! results are merged in chunk order, so the outcome is bit-identical for any
//! worker count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trials per work unit. Changing this does not change results, only
/// scheduling granularity.
const CHUNK: u64 = 4096;

/// Well-known stream domains.
pub mod domain {
    pub const REARRANGE: u64 = 1;
    pub const SRI: u64 = 2;
    pub const POINT_PROCESS: u64 = 3;
    pub const EXACT_GEOM: u64 = 4;
    pub const ORDER_STATISTICS: u64 = 5;
}

#[derive(Debug, Clone)]
pub struct TrialStreams {
    key: [u8; 32],
}

impl TrialStreams {
    pub fn new(master_seed: u64, domain: u64) -> Self {
        let mut expander = ChaCha8Rng::seed_from_u64(master_seed);
        expander.set_stream(domain);
        let mut key = [0u8; 32];
        expander.fill_bytes(&mut key);
        TrialStreams { key }
    }

    /// The independent stream for trial `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}

/// Trial count, master seed and worker count for a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl RunConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        RunConfig {
            trials,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

/// Runs `step` once per trial index and folds the per-chunk accumulators in
/// chunk order.
///
/// `step` receives the accumulator, the trial index and that trial's stream.
pub fn run_trials<A, I, S, M>(
    streams: &TrialStreams,
    trials: u64,
    workers: usize,
    init: I,
    step: S,
    merge: M,
) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, u64, &mut ChaCha8Rng) -> Result<()> + Sync,
    M: Fn(&mut A, A),
{
    let chunks = trials.div_ceil(CHUNK);
    let run_chunk = |chunk: u64| -> Result<A> {
        let mut acc = init();
        let start = chunk * CHUNK;
        let end = (start + CHUNK).min(trials);
        for t in start..end {
            let mut rng = streams.stream(t);
            step(&mut acc, t, &mut rng)?;
        }
        Ok(acc)
    };

    let partials: Vec<Result<A>> = if workers <= 1 {
        (0..chunks).map(run_chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::ThreadPool(e.to_string()))?;
        pool.install(|| (0..chunks).into_par_iter().map(run_chunk).collect())
    };

    let mut total = init();
    for partial in partials {
        merge(&mut total, partial?);
    }
    Ok(total)
}
