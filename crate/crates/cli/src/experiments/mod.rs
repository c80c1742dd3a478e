//! Experiment runners. Each is a pure function of its configuration and
//! the master seed.

mod check_vs_hat;
mod confusion;
mod estimate;
mod river;
mod scaling;
mod sufficiency;
mod triangle;

pub use check_vs_hat::run_check_vs_hat;
pub use confusion::{confusion_matrices, run_confusion, ConfusionMatrix};
pub use estimate::run_estimate;
pub use river::{run_river, synthetic_river_text};
pub use scaling::{run_normalized, run_scaling, ScalingSweep};
pub use sufficiency::run_sufficiency;
pub use triangle::run_triangle;

use rand::seq::IndexedRandom;
use rand::Rng;
use treelocate_core::prelude::*;

use crate::error::CliError;

/// Random streams per experiment cell; cell `c` owns trial streams
/// `c · CELL_STRIDE ..`.
pub(crate) const CELL_STRIDE: u64 = 1 << 32;

pub(crate) fn cell_stream(cell: usize) -> u64 {
    cell as u64 * CELL_STRIDE
}

/// A random tree with `k` observers drawn among its leaves and a source
/// drawn among the remaining nodes.
pub(crate) struct LeafInstance {
    pub tree: Tree,
    pub observers: ObserverSet,
    pub source: NodeId,
}

/// Draws Prüfer trees until one has at least `k` leaves and a node left
/// over for the source.
pub(crate) fn leaf_instance<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    k: usize,
    max_retries: usize,
) -> Result<LeafInstance, CliError> {
    for _ in 0..=max_retries {
        let tree = random_tree_prufer(n, rng).map_err(CliError::data)?;
        let leaves = tree.leaves();
        if leaves.len() < k || k >= n {
            continue;
        }
        let chosen: Vec<NodeId> = leaves.choose_multiple(rng, k).copied().collect();
        let observers = ObserverSet::new(&tree, &chosen).map_err(CliError::data)?;
        let source = *observers
            .non_observers()
            .choose(rng)
            .expect("k < n leaves a non-observer");
        return Ok(LeafInstance {
            tree,
            observers,
            source,
        });
    }
    Err(CliError::Data(format!(
        "no tree on {n} nodes with {k} leaves after {} draws",
        max_retries + 1
    )))
}

/// Mean, standard deviation and standard error of the mean.
pub(crate) fn moments(xs: &[f64]) -> (f64, f64, f64) {
    use treelocate_core::stats;
    let sd = if xs.len() < 2 {
        0.0
    } else {
        stats::std_dev(xs)
    };
    (stats::mean(xs), sd, sd / (xs.len() as f64).sqrt())
}

/// Collects per-trial results, surfacing the first failure.
pub(crate) fn collect<T>(results: Vec<Result<T, CliError>>) -> Result<Vec<T>, CliError> {
    results.into_iter().collect()
}
