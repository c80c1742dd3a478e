//! Paired comparison of the two estimators on random trees with
//! exponential delays.

use treelocate_core::prelude::*;

use super::{cell_stream, collect, leaf_instance, moments};
use crate::config::{check_sizes, CheckVsHatConfig, Settings};
use crate::emit::{Report, Table};
use crate::error::CliError;

const COLUMNS: [&str; 9] = [
    "n",
    "observers",
    "trials",
    "mean_error_hat",
    "std_dev_error_hat",
    "mean_error_check",
    "std_dev_error_check",
    "mean_paired_difference",
    "std_error_paired_difference",
];

pub fn run_check_vs_hat(cfg: &CheckVsHatConfig, settings: &Settings) -> Result<Report, CliError> {
    if !matches!(cfg.delay, DelayModel::Exponential { .. }) {
        return Err(CliError::Config(
            "check_vs_hat.delay must be exponential".into(),
        ));
    }
    check_sizes(&cfg.sizes, "check_vs_hat.sizes")?;
    check_sizes(&[cfg.fixed_size], "check_vs_hat.fixed_size")?;
    let sweeps = [
        (
            "nodes",
            cfg.sizes
                .iter()
                .map(|&n| (n, cfg.leaf_observers))
                .collect::<Vec<_>>(),
        ),
        (
            "observers",
            cfg.observer_counts
                .iter()
                .map(|&k| (cfg.fixed_size, k))
                .collect(),
        ),
    ];
    if sweeps
        .iter()
        .flat_map(|(_, cells)| cells)
        .any(|&(n, k)| k == 0 || k >= n)
    {
        return Err(CliError::Config(
            "observer counts must be between 1 and the tree size minus 1".into(),
        ));
    }
    let opts = settings.estimate_options();
    let trials = settings.estimation_trials();
    let mut report = Report::new("check_vs_hat");
    let mut cell = 0;
    for (name, cells) in sweeps {
        let mut table = Table::new(name, &COLUMNS);
        for (n, k) in cells {
            let pairs = collect(map_trials_from(
                settings.exec,
                settings.seed,
                cell_stream(cell),
                trials,
                |_, rng| {
                    let inst = leaf_instance(rng, n, k, cfg.max_retries)?;
                    let delays = EdgeDelays::iid(cfg.delay, inst.tree.n_edges());
                    let (_, obs) = simulate_observation(
                        &inst.tree,
                        &delays,
                        inst.source,
                        &inst.observers,
                        rng,
                    )
                    .map_err(CliError::data)?;
                    let hat = hat_estimate(&inst.tree, &inst.observers, &delays, &obs, &opts)
                        .map_err(CliError::data)?;
                    let check = check_estimate(&inst.tree, &inst.observers, &delays, &obs, &opts)
                        .map_err(CliError::data)?;
                    let err = |v| edge_distance_error(&inst.tree, v, inst.source);
                    Ok((
                        err(hat.selected).map_err(CliError::data)? as f64,
                        err(check.selected).map_err(CliError::data)? as f64,
                    ))
                },
            ))?;
            cell += 1;
            let hat: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let check: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let diff: Vec<f64> = pairs.iter().map(|p| p.1 - p.0).collect();
            let (hm, hsd, _) = moments(&hat);
            let (cm, csd, _) = moments(&check);
            let (dm, _, dse) = moments(&diff);
            table.push(vec![
                n.into(),
                k.into(),
                trials.into(),
                hm.into(),
                hsd.into(),
                cm.into(),
                csd.into(),
                dm.into(),
                dse.into(),
            ]);
        }
        report.tables.push(table);
    }
    report.summarize("delay", cfg.delay.label());
    report.summarize("trials_per_cell", trials);
    report.summarize("seed", settings.seed);
    Ok(report)
}
