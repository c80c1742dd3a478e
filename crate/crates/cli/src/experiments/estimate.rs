//! One-shot source estimate from a network file and an observation file.

use serde_json::Value;
use treelocate_core::prelude::*;

use crate::config::{EstimateConfig, EstimatorChoice, Settings};
use crate::emit::{Report, Table};
use crate::error::CliError;
use crate::network::{load_observations, Network};

pub fn run_estimate(cfg: &EstimateConfig, settings: &Settings) -> Result<Report, CliError> {
    let network_path = cfg
        .network
        .as_ref()
        .ok_or_else(|| CliError::Config("estimate needs a network file".into()))?;
    let obs_path = cfg
        .observations
        .as_ref()
        .ok_or_else(|| CliError::Config("estimate needs an observation file".into()))?;
    let net = Network::load(network_path)?;
    let delays = net.delays(cfg.delay)?;
    let (observers, obs) = load_observations(obs_path, &net.labels, &net.tree)?;
    let opts = EstimateOptions {
        exec: settings.exec,
        ..settings.estimate_options()
    };
    let report = match cfg.estimator {
        EstimatorChoice::Hat => hat_estimate(&net.tree, &observers, &delays, &obs, &opts),
        EstimatorChoice::Check => {
            if delays.exponential_rates().is_err() {
                return Err(CliError::Config(
                    "the check estimator needs exponential delays on every edge".into(),
                ));
            }
            check_estimate(&net.tree, &observers, &delays, &obs, &opts)
        }
    }
    .map_err(CliError::data)?;
    Ok(labeled_report(&net, &report))
}

/// [`EstimateReport`] with node ids replaced by their labels.
fn labeled_report(net: &Network, r: &EstimateReport) -> Report {
    let label = |v: NodeId| net.labels.label(v).to_owned();
    let labels = |vs: &[NodeId]| Value::from(vs.iter().map(|&v| label(v)).collect::<Vec<_>>());
    let mut table = Table::new("candidates", &["label", "node", "distance", "tied"]);
    for (&v, &d) in &r.per_candidate {
        table.push(vec![
            label(v).into(),
            v.into(),
            d.into(),
            r.ties.contains(&v).into(),
        ]);
    }
    let mut out = Report::new("estimate");
    out.tables.push(table);
    out.summarize(
        "estimator",
        serde_json::to_value(r.estimator).expect("enum serializes"),
    );
    out.summarize("selected", label(r.selected));
    out.summarize("ties", labels(&r.ties));
    out.summarize("candidates_considered", labels(&r.candidates_considered));
    out.summarize("observers_used", labels(&r.observers_used));
    out.summarize("grid_points_used", r.grid_points_used);
    out.summarize("reduction_applied", r.reduction_applied);
    out.summarize("warnings", r.warnings.clone());
    out
}
