use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use treelocate_core::prelude::*;

/// One hat estimate per trial on a fixed random tree with two leaf observers.
fn hat_trials(exec: Execution, trials: usize) -> usize {
    let tree = random_tree_prufer(50, &mut trial_rng(1, 0)).unwrap();
    let leaves = tree.leaves();
    let observers = ObserverSet::new(&tree, &leaves[..2]).unwrap();
    let delays = EdgeDelays::iid(DelayModel::exponential(1.0).unwrap(), tree.n_edges());
    let sources = observers.non_observers();
    map_trials(exec, 11, trials, |i, rng| {
        let source = sources[i % sources.len()];
        let (_, obs) = simulate_observation(&tree, &delays, source, &observers, rng).unwrap();
        hat_estimate(
            &tree,
            &observers,
            &delays,
            &obs,
            &EstimateOptions::default(),
        )
        .unwrap()
        .selected
    })
    .into_iter()
    .sum()
}

fn bench_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("hat_trials_50_nodes");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(
            BenchmarkId::new(format!("{exec:?}"), 64),
            &exec,
            |b, &exec| b.iter(|| black_box(hat_trials(exec, 64))),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_trials);
criterion_main!(benches);
