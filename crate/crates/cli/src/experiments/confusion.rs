//! Confusion matrices on a path with a single observer at one end.

use treelocate_core::prelude::*;
use treelocate_core::stats::spearman;

use super::{cell_stream, collect};
use crate::config::{ConfusionConfig, Settings};
use crate::emit::{slug, Cell, Report, Table};
use crate::error::CliError;

/// Counts of estimates per true source under one delay law.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub model: DelayModel,
    /// Row labels.
    pub sources: Vec<NodeId>,
    /// Column labels: every node that can be estimated.
    pub candidates: Vec<NodeId>,
    /// `counts[i][j]`: trials with source `sources[i]` estimated as
    /// `candidates[j]`.
    pub counts: Vec<Vec<usize>>,
    /// Mean edge-distance error per source.
    pub mean_errors: Vec<f64>,
}

impl ConfusionMatrix {
    pub fn trials(&self) -> usize {
        self.counts.first().map_or(0, |r| r.iter().sum())
    }

    /// Fraction of all trials estimated exactly.
    pub fn diagonal_mass(&self) -> f64 {
        let hits: usize = self
            .sources
            .iter()
            .zip(&self.counts)
            .map(|(s, row)| {
                self.candidates
                    .iter()
                    .position(|c| c == s)
                    .map_or(0, |j| row[j])
            })
            .sum();
        let total: usize = self.counts.iter().flatten().sum();
        hits as f64 / total as f64
    }

    pub fn mean_error(&self) -> f64 {
        self.mean_errors.iter().sum::<f64>() / self.mean_errors.len() as f64
    }

    /// Candidate with the most hits in the row of `source`; smallest id on
    /// ties.
    pub fn modal_estimate(&self, source: NodeId) -> Option<NodeId> {
        let i = self.sources.iter().position(|&s| s == source)?;
        let row = &self.counts[i];
        let best = row.iter().copied().max()?;
        row.iter()
            .position(|&c| c == best)
            .map(|j| self.candidates[j])
    }

    pub fn to_table(&self) -> Table {
        let mut columns = vec!["source".to_owned()];
        columns.extend(self.candidates.iter().map(|c| c.to_string()));
        let mut t = Table::with_columns(slug(&self.model.label()), columns);
        for (s, row) in self.sources.iter().zip(&self.counts) {
            let mut cells: Vec<Cell> = vec![(*s).into()];
            cells.extend(row.iter().map(|&c| Cell::from(c)));
            t.push(cells);
        }
        t
    }
}

fn validate(cfg: &ConfusionConfig) -> Result<(Tree, ObserverSet, Vec<NodeId>), CliError> {
    if cfg.path_nodes < 2 {
        return Err(CliError::Config("path_nodes must be at least 2".into()));
    }
    let tree = Tree::path_graph(cfg.path_nodes).map_err(CliError::config)?;
    let observers = ObserverSet::new(&tree, &[cfg.observer]).map_err(CliError::config)?;
    let sources = match &cfg.sources {
        Some(s) => s.clone(),
        None => observers.non_observers(),
    };
    if sources.is_empty() {
        return Err(CliError::Config("no sources configured".into()));
    }
    for &s in &sources {
        if s >= cfg.path_nodes || s == cfg.observer {
            return Err(CliError::Config(format!(
                "source {s} must be a non-observer node of the path"
            )));
        }
    }
    if cfg.delays.is_empty() {
        return Err(CliError::Config("no delay models configured".into()));
    }
    Ok((tree, observers, sources))
}

/// One matrix per configured delay law.
pub fn confusion_matrices(
    cfg: &ConfusionConfig,
    settings: &Settings,
) -> Result<Vec<ConfusionMatrix>, CliError> {
    let (tree, observers, sources) = validate(cfg)?;
    let trials = settings.estimation_trials();
    let candidates = observers.non_observers();
    let opts = settings.estimate_options();
    let mut out = Vec::new();
    for (m, model) in cfg.delays.iter().enumerate() {
        let delays = EdgeDelays::iid(*model, tree.n_edges());
        let mut counts = Vec::new();
        let mut mean_errors = Vec::new();
        for (i, &source) in sources.iter().enumerate() {
            let cell = m * sources.len() + i;
            let estimates = collect(map_trials_from(
                settings.exec,
                settings.seed,
                cell_stream(cell),
                trials,
                |_, rng| {
                    let (_, obs) = simulate_observation(&tree, &delays, source, &observers, rng)
                        .map_err(CliError::data)?;
                    let r = hat_estimate(&tree, &observers, &delays, &obs, &opts)
                        .map_err(CliError::data)?;
                    Ok(r.selected)
                },
            ))?;
            let mut row = vec![0usize; candidates.len()];
            let mut err_sum = 0usize;
            for v in estimates {
                let j = candidates
                    .binary_search(&v)
                    .expect("estimate is a candidate");
                row[j] += 1;
                err_sum += tree.distance(v, source).map_err(CliError::data)?;
            }
            counts.push(row);
            mean_errors.push(err_sum as f64 / trials as f64);
        }
        out.push(ConfusionMatrix {
            model: *model,
            sources: sources.clone(),
            candidates: candidates.clone(),
            counts,
            mean_errors,
        });
    }
    Ok(out)
}

pub fn run_confusion(cfg: &ConfusionConfig, settings: &Settings) -> Result<Report, CliError> {
    let matrices = confusion_matrices(cfg, settings)?;
    let mut report = Report::new("confusion");
    let mut summary = Table::new(
        "summary",
        &[
            "model",
            "trials",
            "diagonal_mass",
            "mean_error",
            "spearman_error_vs_distance",
        ],
    );
    for m in &matrices {
        let distances: Vec<f64> = m
            .sources
            .iter()
            .map(|&s| s.abs_diff(cfg.observer) as f64)
            .collect();
        let rho = spearman(&distances, &m.mean_errors);
        let key = slug(&m.model.label());
        report.summarize(format!("{key}.diagonal_mass"), m.diagonal_mass());
        report.summarize(format!("{key}.mean_error"), m.mean_error());
        report.summarize(format!("{key}.spearman_error_vs_distance"), rho);
        summary.push(vec![
            m.model.label().into(),
            m.trials().into(),
            m.diagonal_mass().into(),
            m.mean_error().into(),
            rho.into(),
        ]);
        report.tables.push(m.to_table());
    }
    report.tables.push(summary);
    report.summarize("trials_per_source", settings.estimation_trials());
    report.summarize("seed", settings.seed);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, Overrides};

    fn settings(trials: usize) -> Settings {
        let flags = Overrides {
            trials: Some(trials),
            seed: Some(3),
            ..Default::default()
        };
        Settings::resolve(&ExperimentConfig::default(), &flags).unwrap()
    }

    #[test]
    fn single_trial_rows_hold_one_count() {
        let cfg = ConfusionConfig {
            delays: vec![DelayModel::exponential(1.0).unwrap()],
            ..Default::default()
        };
        let m = &confusion_matrices(&cfg, &settings(1)).unwrap()[0];
        assert_eq!(m.sources, (1..=10).collect::<Vec<_>>());
        for row in &m.counts {
            assert_eq!(row.iter().sum::<usize>(), 1);
            assert_eq!(row.iter().filter(|&&c| c == 1).count(), 1);
        }
    }

    #[test]
    fn rows_sum_to_trials_and_table_shape() {
        let cfg = ConfusionConfig {
            path_nodes: 5,
            sources: Some(vec![1, 3]),
            delays: vec![DelayModel::pos_normal(1.0, 0.25).unwrap()],
            ..Default::default()
        };
        let m = &confusion_matrices(&cfg, &settings(20)).unwrap()[0];
        assert!(m.counts.iter().all(|r| r.iter().sum::<usize>() == 20));
        let t = m.to_table();
        assert_eq!(t.columns, vec!["source", "1", "2", "3", "4"]);
        assert_eq!(t.rows.len(), 2);
        assert_eq!(m.modal_estimate(1), Some(1));
    }

    #[test]
    fn bad_configs() {
        for cfg in [
            ConfusionConfig {
                path_nodes: 1,
                ..Default::default()
            },
            ConfusionConfig {
                sources: Some(vec![0]),
                ..Default::default()
            },
            ConfusionConfig {
                sources: Some(vec![11]),
                ..Default::default()
            },
            ConfusionConfig {
                delays: vec![],
                ..Default::default()
            },
        ] {
            assert_eq!(
                confusion_matrices(&cfg, &settings(1))
                    .unwrap_err()
                    .exit_code(),
                2
            );
        }
    }
}
