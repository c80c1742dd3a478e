//! Estimation error on random trees as the tree size or the observer count
//! grows, raw and normalized by the tree diameter.

use treelocate_core::prelude::*;

use super::{cell_stream, collect, leaf_instance, moments};
use crate::config::{check_sizes, NormalizedConfig, ScalingConfig, Settings};
use crate::emit::{Cell, Report, Table};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingSweep {
    /// Fixed observer count, growing trees.
    Nodes,
    /// Fixed tree size, growing observer count.
    Observers,
}

/// Per-trial edge-distance error and tree diameter.
struct CellResult {
    errors: Vec<f64>,
    normalized: Vec<f64>,
    diameters: Vec<f64>,
}

struct Cellspec<'a> {
    index: usize,
    n: usize,
    k: usize,
    delay: &'a DelayModel,
    max_retries: usize,
}

fn run_cell(spec: &Cellspec, settings: &Settings) -> Result<CellResult, CliError> {
    let opts = settings.estimate_options();
    let trials = collect(map_trials_from(
        settings.exec,
        settings.seed,
        cell_stream(spec.index),
        settings.estimation_trials(),
        |_, rng| {
            let inst = leaf_instance(rng, spec.n, spec.k, spec.max_retries)?;
            let delays = EdgeDelays::iid(*spec.delay, inst.tree.n_edges());
            let (_, obs) =
                simulate_observation(&inst.tree, &delays, inst.source, &inst.observers, rng)
                    .map_err(CliError::data)?;
            let r = hat_estimate(&inst.tree, &inst.observers, &delays, &obs, &opts)
                .map_err(CliError::data)?;
            let err =
                edge_distance_error(&inst.tree, r.selected, inst.source).map_err(CliError::data)?;
            Ok((err as f64, inst.tree.diameter() as f64))
        },
    ))?;
    Ok(CellResult {
        errors: trials.iter().map(|t| t.0).collect(),
        normalized: trials.iter().map(|t| t.0 / t.1).collect(),
        diameters: trials.iter().map(|t| t.1).collect(),
    })
}

const COLUMNS: [&str; 10] = [
    "n",
    "observers",
    "trials",
    "mean_error",
    "std_dev_error",
    "std_error",
    "mean_diameter",
    "mean_normalized_error",
    "std_dev_normalized_error",
    "std_error_normalized",
];

fn row(n: usize, k: usize, r: &CellResult) -> Vec<Cell> {
    let (m, sd, se) = moments(&r.errors);
    let (nm, nsd, nse) = moments(&r.normalized);
    let (dm, _, _) = moments(&r.diameters);
    vec![
        n.into(),
        k.into(),
        r.errors.len().into(),
        m.into(),
        sd.into(),
        se.into(),
        dm.into(),
        nm.into(),
        nsd.into(),
        nse.into(),
    ]
}

pub fn run_scaling(
    cfg: &ScalingConfig,
    sweeps: &[ScalingSweep],
    settings: &Settings,
) -> Result<Report, CliError> {
    let mut report = Report::new("scaling");
    let mut cell = 0;
    for sweep in sweeps {
        let cells: Vec<(usize, usize)> = match sweep {
            ScalingSweep::Nodes => {
                check_sizes(&cfg.sizes, "scaling.sizes")?;
                cfg.sizes.iter().map(|&n| (n, cfg.leaf_observers)).collect()
            }
            ScalingSweep::Observers => {
                check_sizes(&[cfg.fixed_size], "scaling.fixed_size")?;
                cfg.observer_counts
                    .iter()
                    .map(|&k| (cfg.fixed_size, k))
                    .collect()
            }
        };
        if cells.iter().any(|&(n, k)| k == 0 || k >= n) {
            return Err(CliError::Config(
                "observer counts must be between 1 and the tree size minus 1".into(),
            ));
        }
        if cells.is_empty() {
            return Err(CliError::Config(
                "scaling.observer_counts must not be empty".into(),
            ));
        }
        let name = match sweep {
            ScalingSweep::Nodes => "nodes",
            ScalingSweep::Observers => "observers",
        };
        let mut table = Table::new(name, &COLUMNS);
        for (n, k) in cells {
            let spec = Cellspec {
                index: cell,
                n,
                k,
                delay: &cfg.delay,
                max_retries: cfg.max_retries,
            };
            cell += 1;
            table.push(row(n, k, &run_cell(&spec, settings)?));
        }
        report.tables.push(table);
    }
    report.summarize("delay", cfg.delay.label());
    report.summarize("trials_per_cell", settings.estimation_trials());
    report.summarize("seed", settings.seed);
    Ok(report)
}

pub fn run_normalized(cfg: &NormalizedConfig, settings: &Settings) -> Result<Report, CliError> {
    check_sizes(&cfg.sizes, "normalized.sizes")?;
    if cfg.delays.is_empty() {
        return Err(CliError::Config(
            "normalized.delays must not be empty".into(),
        ));
    }
    if cfg
        .sizes
        .iter()
        .any(|&n| cfg.leaf_observers == 0 || cfg.leaf_observers >= n)
    {
        return Err(CliError::Config(
            "normalized.leaf_observers must be between 1 and the tree size minus 1".into(),
        ));
    }
    let mut columns = vec!["delay"];
    columns.extend(COLUMNS);
    let mut table = Table::new("normalized", &columns);
    let mut cell = 0;
    for delay in &cfg.delays {
        for &n in &cfg.sizes {
            let spec = Cellspec {
                index: cell,
                n,
                k: cfg.leaf_observers,
                delay,
                max_retries: cfg.max_retries,
            };
            cell += 1;
            let mut cells = vec![Cell::from(delay.label())];
            cells.extend(row(n, cfg.leaf_observers, &run_cell(&spec, settings)?));
            table.push(cells);
        }
    }
    let mut report = Report::new("normalized");
    report.tables.push(table);
    report.summarize("trials_per_cell", settings.estimation_trials());
    report.summarize("seed", settings.seed);
    Ok(report)
}
