//! JSON experiment configuration and its merge with command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use treelocate_core::prelude::*;

use crate::error::CliError;

/// Trials per cell when nothing else is requested.
pub const DEFAULT_TRIALS: usize = 200;
/// Trials per cell under `--paper-scale`.
pub const PAPER_TRIALS: usize = 1000;
/// Master seed used when neither the config nor the flags give one.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Confusion,
    ScalingNodes,
    ScalingObservers,
    NormalizedDiameter,
    River,
    CheckVsHat,
    Triangle,
    SufficiencyDemo,
    Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorChoice {
    Hat,
    Check,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub use_reduction: Option<bool>,
    pub grid: Option<GridSpec>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    #[serde(default)]
    pub confusion: ConfusionConfig,
    #[serde(default)]
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub normalized: NormalizedConfig,
    #[serde(default)]
    pub river: RiverConfig,
    #[serde(default)]
    pub check_vs_hat: CheckVsHatConfig,
    #[serde(default)]
    pub triangle: TriangleConfig,
    #[serde(default)]
    pub sufficiency: SufficiencyConfig,
    #[serde(default)]
    pub estimate: EstimateConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(CliError::config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Path infection network with a single observer.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfusionConfig {
    pub path_nodes: usize,
    pub observer: NodeId,
    /// Defaults to every non-observer.
    pub sources: Option<Vec<NodeId>>,
    pub delays: Vec<DelayModel>,
}

impl Default for ConfusionConfig {
    fn default() -> Self {
        ConfusionConfig {
            path_nodes: 11,
            observer: 0,
            sources: None,
            delays: vec![
                DelayModel::PosNormal {
                    mean: 1.0,
                    std: 0.25,
                },
                DelayModel::PosNormal {
                    mean: 1.0,
                    std: 1.0,
                },
                DelayModel::Uniform {
                    lower: 0.0,
                    upper: 2.0,
                },
                DelayModel::Exponential { rate: 1.0 },
                DelayModel::AbsCauchy { scale: 1.0 },
            ],
        }
    }
}

/// Random Prüfer trees with observers drawn among the leaves.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub delay: DelayModel,
    /// Tree sizes for the size sweep.
    pub sizes: Vec<usize>,
    /// Observer count for the size sweep.
    pub leaf_observers: usize,
    /// Tree size for the observer sweep.
    pub fixed_size: usize,
    pub observer_counts: Vec<usize>,
    /// Tree redraws allowed when a tree has too few leaves.
    pub max_retries: usize,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            delay: DelayModel::Exponential { rate: 1.0 },
            sizes: vec![10, 20, 50, 100],
            leaf_observers: 2,
            fixed_size: 100,
            observer_counts: vec![1, 2, 5, 10, 20, 40],
            max_retries: 10_000,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizedConfig {
    pub delays: Vec<DelayModel>,
    pub sizes: Vec<usize>,
    pub leaf_observers: usize,
    pub max_retries: usize,
}

impl Default for NormalizedConfig {
    fn default() -> Self {
        NormalizedConfig {
            delays: vec![
                DelayModel::PosNormal {
                    mean: 1.0,
                    std: 0.25,
                },
                DelayModel::Exponential { rate: 1.0 },
                DelayModel::Uniform {
                    lower: 0.0,
                    upper: 2.0,
                },
            ],
            sizes: vec![10, 20, 50, 100],
            leaf_observers: 2,
            max_retries: 10_000,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RiverConfig {
    /// Network file; the bundled synthetic network when absent.
    pub network: Option<PathBuf>,
    /// Label of the outbreak origin; the first label in the file by default.
    pub root: Option<String>,
    pub observers: usize,
    /// Size of the neighbourhood of the root used for the summary mass.
    pub nearest: usize,
    /// Replaces every per-edge law from the file.
    pub delay: Option<DelayModel>,
}

impl Default for RiverConfig {
    fn default() -> Self {
        RiverConfig {
            network: None,
            root: None,
            observers: 3,
            nearest: 5,
            delay: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckVsHatConfig {
    /// Must be exponential.
    pub delay: DelayModel,
    pub sizes: Vec<usize>,
    pub leaf_observers: usize,
    pub fixed_size: usize,
    pub observer_counts: Vec<usize>,
    pub max_retries: usize,
}

impl Default for CheckVsHatConfig {
    fn default() -> Self {
        CheckVsHatConfig {
            delay: DelayModel::Exponential { rate: 1.0 },
            sizes: vec![20, 50, 100],
            leaf_observers: 2,
            fixed_size: 50,
            observer_counts: vec![1, 2, 5, 10],
            max_retries: 10_000,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TriangleConfig {
    /// Rates `(λ₁, λ₂, λ₃)` of the source–observer, source–other and
    /// other–observer edges.
    pub rates: Vec<[f64; 3]>,
    /// Simulated outbreaks per rate triple; `--trials` overrides.
    pub trials: usize,
    /// Standard errors allowed between simulation and closed form.
    pub tolerance_se: f64,
    pub ks_level: f64,
}

impl Default for TriangleConfig {
    fn default() -> Self {
        TriangleConfig {
            rates: vec![[1.0, 1.0, 1.0], [1.0, 2.0, 3.0]],
            trials: 1_000_000,
            tolerance_se: 4.0,
            ks_level: 0.01,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SufficiencyConfig {
    /// Observers hanging off the right hub.
    pub fan: usize,
    /// Rate of the i.i.d. exponential delays.
    pub rate: f64,
    /// Accepted outbreaks per source; `--trials` overrides.
    pub accepted: usize,
    /// Separation, in combined standard errors, required between the two
    /// conditional means.
    pub tolerance_se: f64,
}

impl Default for SufficiencyConfig {
    fn default() -> Self {
        SufficiencyConfig {
            fan: 3,
            rate: 1.0,
            accepted: 1_000_000,
            tolerance_se: 4.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateConfig {
    pub network: Option<PathBuf>,
    pub observations: Option<PathBuf>,
    /// Replaces every per-edge law from the network file.
    pub delay: Option<DelayModel>,
    pub estimator: EstimatorChoice,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            network: None,
            observations: None,
            delay: None,
            estimator: EstimatorChoice::Hat,
        }
    }
}

/// Command-line flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub paper_scale: bool,
    pub no_reduction: bool,
    pub threads: Option<usize>,
}

/// Run-wide settings after merging the config file with the flags.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    /// Explicit trial count from the flags or the config file.
    pub trials: Option<usize>,
    pub paper_scale: bool,
    pub use_reduction: bool,
    pub grid: GridSpec,
    pub exec: Execution,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn resolve(config: &ExperimentConfig, flags: &Overrides) -> Result<Self, CliError> {
        let trials = flags.trials.or(config.trials);
        if trials == Some(0) {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        if flags.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        let grid = config.grid.clone().unwrap_or_default();
        grid.validate().map_err(CliError::Config)?;
        let exec = if flags.threads == Some(1) {
            Execution::Sequential
        } else {
            Execution::Parallel.effective()
        };
        Ok(Settings {
            seed: flags.seed.or(config.seed).unwrap_or(DEFAULT_SEED),
            trials,
            paper_scale: flags.paper_scale,
            use_reduction: !flags.no_reduction && config.use_reduction.unwrap_or(true),
            grid,
            exec,
            format: flags.format.or(config.format),
            out: flags.out.clone().or_else(|| config.out.clone()),
        })
    }

    /// Trials per cell for the estimation experiments.
    pub fn estimation_trials(&self) -> usize {
        self.trials.unwrap_or(if self.paper_scale {
            PAPER_TRIALS
        } else {
            DEFAULT_TRIALS
        })
    }

    /// Options for one estimate inside a trial; trials already run in
    /// parallel, so candidates are scored sequentially.
    pub fn estimate_options(&self) -> EstimateOptions {
        EstimateOptions {
            grid: self.grid.clone(),
            use_reduction: self.use_reduction,
            exec: Execution::Sequential,
        }
    }
}

/// Rejects tree sizes and observer counts that cannot host an experiment.
pub fn check_sizes(sizes: &[usize], what: &str) -> Result<(), CliError> {
    if sizes.is_empty() {
        return Err(CliError::Config(format!("{what} must not be empty")));
    }
    if let Some(&n) = sizes.iter().find(|&&n| n < 2) {
        return Err(CliError::Config(format!(
            "{what} must all be at least 2, got {n}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        let s = Settings::resolve(&cfg, &Overrides::default()).unwrap();
        assert_eq!(s.seed, DEFAULT_SEED);
        assert_eq!(s.estimation_trials(), DEFAULT_TRIALS);
        assert!(s.use_reduction);
        assert_eq!(cfg.confusion.path_nodes, 11);
        assert_eq!(cfg.confusion.delays.len(), 5);
    }

    #[test]
    fn flags_override_config() {
        let cfg = ExperimentConfig::from_json(
            r#"{"seed": 5, "trials": 7, "use_reduction": true, "format": "json"}"#,
        )
        .unwrap();
        let flags = Overrides {
            seed: Some(9),
            no_reduction: true,
            ..Default::default()
        };
        let s = Settings::resolve(&cfg, &flags).unwrap();
        assert_eq!(s.seed, 9);
        assert_eq!(s.estimation_trials(), 7);
        assert!(!s.use_reduction);
        assert_eq!(s.format, Some(Format::Json));
    }

    #[test]
    fn paper_scale_only_fills_the_default() {
        let cfg = ExperimentConfig::default();
        let mut flags = Overrides {
            paper_scale: true,
            ..Default::default()
        };
        assert_eq!(
            Settings::resolve(&cfg, &flags).unwrap().estimation_trials(),
            PAPER_TRIALS
        );
        flags.trials = Some(3);
        assert_eq!(
            Settings::resolve(&cfg, &flags).unwrap().estimation_trials(),
            3
        );
    }

    #[test]
    fn invalid_configs_are_config_errors() {
        for text in [
            r#"{"trials": 0}"#,
            r#"{"unknown": 1}"#,
            r#"{"confusion": {"delays": [{"kind": "exponential", "rate": -1}]}}"#,
            r#"{"grid": {"magnitudes": 0}}"#,
            "not json",
        ] {
            let err = ExperimentConfig::from_json(text)
                .and_then(|c| Settings::resolve(&c, &Overrides::default()).map(|_| ()))
                .unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn nested_sections_parse() {
        let cfg = ExperimentConfig::from_json(
            r#"{"experiment": "scaling_nodes",
                "scaling": {"sizes": [20, 100], "delay": {"kind": "uniform", "lower": 0, "upper": 1}},
                "triangle": {"rates": [[1, 2, 3]]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.experiment, Some(ExperimentKind::ScalingNodes));
        assert_eq!(cfg.scaling.sizes, vec![20, 100]);
        assert_eq!(cfg.scaling.leaf_observers, 2);
        assert_eq!(cfg.triangle.rates, vec![[1.0, 2.0, 3.0]]);
    }

    #[test]
    fn size_checks() {
        assert!(check_sizes(&[2, 10], "sizes").is_ok());
        assert!(check_sizes(&[1], "sizes").is_err());
        assert!(check_sizes(&[], "sizes").is_err());
    }
}
