//! Outbreak on a river network started at the outlet, observed by a few
//! randomly placed nodes.

use rand::seq::IndexedRandom;
use treelocate_core::prelude::*;

use super::collect;
use crate::config::{RiverConfig, Settings};
use crate::emit::{Report, Table};
use crate::error::CliError;
use crate::network::{synthetic_river, Network, BUNDLED_RIVER, RIVER_NODES, RIVER_SEED};

/// The configured network file, or the bundled synthetic network.
pub fn river_network(cfg: &RiverConfig) -> Result<(Network, bool), CliError> {
    match &cfg.network {
        Some(path) => Ok((Network::load(path)?, false)),
        None => Ok((Network::parse(BUNDLED_RIVER)?, true)),
    }
}

/// The `k` nodes nearest to `root` by edge distance, ties broken by id.
fn nearest_nodes(tree: &Tree, root: NodeId, k: usize) -> Result<Vec<NodeId>, CliError> {
    let mut by_distance = (0..tree.n())
        .map(|v| Ok((tree.distance(root, v).map_err(CliError::data)?, v)))
        .collect::<Result<Vec<_>, CliError>>()?;
    by_distance.sort_unstable();
    Ok(by_distance.into_iter().take(k).map(|(_, v)| v).collect())
}

pub fn run_river(cfg: &RiverConfig, settings: &Settings) -> Result<Report, CliError> {
    let (net, synthetic) = river_network(cfg)?;
    let tree = &net.tree;
    let root = match &cfg.root {
        Some(label) => net
            .labels
            .id(label)
            .ok_or_else(|| CliError::Config(format!("root `{label}` is not in the network")))?,
        None => 0,
    };
    if cfg.observers == 0 || cfg.observers >= tree.n() {
        return Err(CliError::Config(format!(
            "river.observers must be between 1 and {}",
            tree.n() - 1
        )));
    }
    if cfg.nearest == 0 {
        return Err(CliError::Config("river.nearest must be at least 1".into()));
    }
    let delays = net.delays(cfg.delay)?;
    let pool: Vec<NodeId> = (0..tree.n()).filter(|&v| v != root).collect();
    let trials = settings.estimation_trials();
    let opts = settings.estimate_options();
    let selected = collect(map_trials(
        settings.exec,
        settings.seed,
        trials,
        |_, rng| {
            let chosen: Vec<NodeId> = pool.choose_multiple(rng, cfg.observers).copied().collect();
            let observers = ObserverSet::new(tree, &chosen).map_err(CliError::data)?;
            let (_, obs) = simulate_observation(tree, &delays, root, &observers, rng)
                .map_err(CliError::data)?;
            let r = hat_estimate(tree, &observers, &delays, &obs, &opts).map_err(CliError::data)?;
            Ok(r.selected)
        },
    ))?;

    let mut counts = vec![0usize; tree.n()];
    for &v in &selected {
        counts[v] += 1;
    }
    let near = nearest_nodes(tree, root, cfg.nearest)?;
    let near_hits: usize = near.iter().map(|&v| counts[v]).sum();
    let mut errors = 0usize;
    let mut table = Table::new(
        "heat",
        &["node", "label", "distance_to_root", "count", "frequency"],
    );
    for (v, &count) in counts.iter().enumerate() {
        let d = tree.distance(root, v).map_err(CliError::data)?;
        errors += d * count;
        table.push(vec![
            v.into(),
            net.labels.label(v).into(),
            d.into(),
            count.into(),
            (count as f64 / trials as f64).into(),
        ]);
    }
    let mut report = Report::new("river");
    report.tables.push(table);
    report.summarize("root", net.labels.label(root));
    report.summarize("nodes", tree.n());
    report.summarize("synthetic_network", synthetic);
    report.summarize("trials", trials);
    report.summarize("seed", settings.seed);
    report.summarize("nearest_nodes", cfg.nearest);
    report.summarize("nearest_mass", near_hits as f64 / trials as f64);
    report.summarize("mean_error", errors as f64 / trials as f64);
    Ok(report)
}

/// Text of the bundled synthetic network, for `--write-network`.
pub fn synthetic_river_text() -> String {
    synthetic_river(RIVER_NODES, RIVER_SEED).to_text(crate::network::RIVER_HEADER)
}
