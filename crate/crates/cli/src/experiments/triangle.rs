//! Simulated spanning-tree census of the triangle network checked against
//! the closed-form probabilities and conditional means.

use treelocate_core::prelude::*;
use treelocate_core::sim::{triangle_conditional_means, triangle_tree_probabilities};
use treelocate_core::stats::{ks_p_value, ks_statistic};

use crate::config::{Settings, TriangleConfig};
use crate::emit::{Report, Table};
use crate::error::CliError;

const TREE_NAMES: [&str; 3] = ["T1", "T2", "T3"];

fn rates_label(r: &[f64; 3]) -> String {
    format!("{},{},{}", r[0], r[1], r[2])
}

pub fn run_triangle(cfg: &TriangleConfig, settings: &Settings) -> Result<Report, CliError> {
    let trials = settings.trials.unwrap_or(cfg.trials);
    if trials < 2 {
        return Err(CliError::Config("triangle needs at least 2 trials".into()));
    }
    if cfg.rates.is_empty() {
        return Err(CliError::Config("triangle.rates must not be empty".into()));
    }
    if !(cfg.tolerance_se > 0.0 && cfg.ks_level > 0.0 && cfg.ks_level < 1.0) {
        return Err(CliError::Config(
            "triangle.tolerance_se must be positive and ks_level in (0, 1)".into(),
        ));
    }
    let mut table = Table::new(
        "checks",
        &[
            "rates",
            "quantity",
            "expected",
            "observed",
            "std_error",
            "z",
            "pass",
        ],
    );
    let mut failures = Vec::new();
    for (k, rates) in cfg.rates.iter().enumerate() {
        let census = triangle_census(
            *rates,
            trials,
            settings.seed.wrapping_add(k as u64),
            settings.exec,
        )
        .map_err(CliError::config)?;
        let label = rates_label(rates);
        let mut check = |quantity: String, expected: f64, observed: f64, se: f64| {
            let z = (observed - expected) / se;
            // A zero standard error only passes on an exact match.
            let pass = (observed - expected).abs() <= cfg.tolerance_se * se;
            if !pass {
                failures.push(format!(
                    "{quantity} at rates ({label}): {observed} vs {expected} (se {se})"
                ));
            }
            table.push(vec![
                label.as_str().into(),
                quantity.into(),
                expected.into(),
                observed.into(),
                se.into(),
                z.into(),
                pass.into(),
            ]);
        };
        let p = triangle_tree_probabilities(*rates);
        let m = triangle_conditional_means(*rates);
        let (p_hat, p_se) = (census.probabilities(), census.probability_std_errors());
        let (m_hat, m_se) = (census.conditional_means(), census.conditional_std_errors());
        for i in 0..3 {
            check(format!("P({})", TREE_NAMES[i]), p[i], p_hat[i], p_se[i]);
        }
        for i in 0..3 {
            check(
                format!("E[tau_o|{}]", TREE_NAMES[i]),
                m[i],
                m_hat[i],
                m_se[i],
            );
        }
        // Given T1 the observer time is the minimum of the two source
        // edges, hence Exponential(λ₁ + λ₂) and not Exponential(λ₁).
        let t1 = &census.times_by_tree[TriangleTree::ViaObserver.index()];
        for (name, rate, should_reject) in [
            ("naive", rates[0], true),
            ("tilted", rates[0] + rates[1], false),
        ] {
            let d = ks_statistic(t1, |x| 1.0 - (-rate * x).exp());
            let p_value = ks_p_value(d, t1.len());
            let rejected = p_value < cfg.ks_level;
            let pass = !t1.is_empty() && rejected == should_reject;
            let quantity = format!("KS p-value tau_o|T1 ~ Exponential({rate}) [{name}]");
            if !pass {
                failures.push(format!(
                    "{quantity} at rates ({label}): p = {p_value}, expected {} at level {}",
                    if should_reject {
                        "rejection"
                    } else {
                        "acceptance"
                    },
                    cfg.ks_level
                ));
            }
            table.push(vec![
                label.as_str().into(),
                quantity.into(),
                cfg.ks_level.into(),
                p_value.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                pass.into(),
            ]);
        }
    }
    let mut report = Report::new("triangle");
    report.tables.push(table);
    report.summarize("trials_per_rate_triple", trials);
    report.summarize("seed", settings.seed);
    report.summarize("checks_failed", failures.len());
    report.failures = failures;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, Overrides};

    fn settings(trials: usize) -> Settings {
        let flags = Overrides {
            trials: Some(trials),
            seed: Some(1),
            ..Default::default()
        };
        Settings::resolve(&ExperimentConfig::default(), &flags).unwrap()
    }

    #[test]
    fn moderate_census_passes() {
        let r = run_triangle(&TriangleConfig::default(), &settings(100_000)).unwrap();
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        let t = r.table("checks").unwrap();
        assert_eq!(t.rows.len(), 16);
        assert_eq!(t.number(0, "expected"), Some(0.25));
        assert!((t.number(8, "expected").unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn tiny_census_reports_failures_instead_of_panicking() {
        let cfg = TriangleConfig {
            rates: vec![[1.0, 1.0, 1.0]],
            ..Default::default()
        };
        let r = run_triangle(&cfg, &settings(2)).unwrap();
        assert_eq!(r.table("checks").unwrap().rows.len(), 8);
    }

    #[test]
    fn invalid_rates_are_config_errors() {
        let cfg = TriangleConfig {
            rates: vec![[1.0, -1.0, 1.0]],
            ..Default::default()
        };
        assert_eq!(
            run_triangle(&cfg, &settings(10)).unwrap_err().exit_code(),
            2
        );
    }
}
