//! Trial-level parallelism with deterministic per-trial generators.
//!
//! Every trial draws from its own ChaCha8 stream keyed by `(seed, index)`, so
//! results do not depend on how trials are spread over workers. Without the
//! `parallel` feature everything runs on the calling thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How independent work items are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `Parallel` when the crate was built with rayon, `Sequential` otherwise.
    pub fn effective(self) -> Self {
        if cfg!(feature = "parallel") {
            self
        } else {
            Execution::Sequential
        }
    }
}

/// Generator for trial `index` under master `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `f(i)` for `i in 0..n`, in index order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec.effective() {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel => unreachable!("effective() downgrades without rayon"),
    }
}

/// Runs `trials` independent trials, handing each its own generator.
pub fn map_trials<T, F>(exec: Execution, seed: u64, trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync + Send,
{
    map_trials_from(exec, seed, 0, trials, f)
}

/// Like [`map_trials`], with trial `i` drawing from stream `first + i`.
/// Disjoint stream ranges keep experiment cells independent under one seed.
pub fn map_trials_from<T, F>(exec: Execution, seed: u64, first: u64, trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync + Send,
{
    map_indexed(exec, trials, |i| {
        let mut rng = trial_rng(seed, first + i as u64);
        f(i, &mut rng)
    })
}
