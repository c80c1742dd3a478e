//! Two-sided star: the law of the far observer's time given that the hub
//! observer is infected first depends on the source side, so the earliest
//! observer cannot be dropped from the data.

use treelocate_core::fixtures::two_sided_star;
use treelocate_core::prelude::*;
use treelocate_core::sim::{infection_times, sample_delays};

use super::moments;
use crate::config::{Settings, SufficiencyConfig};
use crate::emit::{Report, Table};
use crate::error::CliError;

/// Outbreaks simulated per batch while waiting for enough accepted ones.
const BATCH: usize = 1 << 16;

struct SideResult {
    attempts: usize,
    unconditional: Vec<f64>,
    conditional: Vec<f64>,
}

/// Simulates outbreaks from `source` in trial order until `target` of them
/// have the hub observer strictly first.
#[allow(clippy::too_many_arguments)]
fn run_side(
    tree: &Tree,
    delays: &EdgeDelays,
    observers: &[NodeId],
    far: NodeId,
    source: NodeId,
    target: usize,
    stream: u64,
    settings: &Settings,
) -> Result<SideResult, CliError> {
    let mut out = SideResult {
        attempts: 0,
        unconditional: Vec::new(),
        conditional: Vec::new(),
    };
    let mut next = 0u64;
    while out.conditional.len() < target {
        let batch = map_trials_from(
            settings.exec,
            settings.seed,
            stream + next,
            BATCH,
            |_, rng| {
                let x = sample_delays(delays, rng);
                let times = infection_times(tree, &x, source)
                    .expect("fixture is valid")
                    .times;
                let hub = times[observers[0]];
                let first = observers[1..].iter().all(|&o| hub < times[o]);
                (times[far], first)
            },
        );
        next += BATCH as u64;
        for (t_far, first) in batch {
            out.attempts += 1;
            out.unconditional.push(t_far);
            if first {
                out.conditional.push(t_far);
                if out.conditional.len() == target {
                    break;
                }
            }
        }
        if next > 1 << 40 {
            return Err(CliError::Data(
                "conditioning event is too rare to reach the requested sample".into(),
            ));
        }
    }
    Ok(out)
}

pub fn run_sufficiency(cfg: &SufficiencyConfig, settings: &Settings) -> Result<Report, CliError> {
    let target = settings.trials.unwrap_or(cfg.accepted);
    if target < 2 {
        return Err(CliError::Config(
            "sufficiency needs at least 2 accepted trials".into(),
        ));
    }
    if cfg.fan == 0 {
        return Err(CliError::Config(
            "sufficiency.fan must be at least 1".into(),
        ));
    }
    let model = DelayModel::exponential(cfg.rate).map_err(CliError::config)?;
    let star = two_sided_star(cfg.fan);
    let delays = EdgeDelays::iid(model, star.tree.n_edges());
    let n = cfg.fan as f64;
    let mean = 1.0 / cfg.rate;
    // Closed forms for i.i.d. exponential delays: from the left hub the far
    // time exceeds the hub time, from the right hub the hub delay is the
    // minimum of n + 1 delays.
    let sides = [
        ("left", star.left, 1.5 * mean, 0.5),
        (
            "right",
            star.right,
            mean / (n + 1.0) + 2.0 * mean,
            1.0 / (n + 1.0),
        ),
    ];
    let mut table = Table::new(
        "sources",
        &[
            "source",
            "node",
            "attempts",
            "accepted",
            "acceptance_fraction",
            "expected_acceptance_fraction",
            "unconditional_mean",
            "conditional_mean",
            "conditional_std_error",
            "expected_conditional_mean",
        ],
    );
    let mut stats = Vec::new();
    for (i, (name, node, expected_mean, expected_frac)) in sides.into_iter().enumerate() {
        let r = run_side(
            &star.tree,
            &delays,
            &star.observers,
            star.far,
            node,
            target,
            (i as u64) << 48,
            settings,
        )?;
        let (cm, _, cse) = moments(&r.conditional);
        let (um, _, _) = moments(&r.unconditional);
        table.push(vec![
            name.into(),
            node.into(),
            r.attempts.into(),
            r.conditional.len().into(),
            (r.conditional.len() as f64 / r.attempts as f64).into(),
            expected_frac.into(),
            um.into(),
            cm.into(),
            cse.into(),
            expected_mean.into(),
        ]);
        stats.push((cm, cse));
    }
    let difference = stats[1].0 - stats[0].0;
    let combined_se = stats[0].1.hypot(stats[1].1);
    let separation = difference.abs() / combined_se;
    let mut report = Report::new("sufficiency");
    report.tables.push(table);
    report.summarize("fan", cfg.fan);
    report.summarize("accepted_per_source", target);
    report.summarize("seed", settings.seed);
    report.summarize("mean_difference", difference);
    report.summarize("combined_std_error", combined_se);
    report.summarize("separation_in_std_errors", separation);
    if !(separation > cfg.tolerance_se) {
        report.failures.push(format!(
            "conditional means differ by {separation} standard errors, need more than {}",
            cfg.tolerance_se
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, Overrides};

    /// Used by tests to draw a quick unconditional sample.
    fn far_time_from_left<R: rand::Rng>(rng: &mut R) -> f64 {
        let star = two_sided_star(3);
        let delays = EdgeDelays::iid(DelayModel::exponential(1.0).unwrap(), star.tree.n_edges());
        let x = sample_delays(&delays, rng);
        infection_times(&star.tree, &x, star.left).unwrap().times[star.far]
    }

    fn settings(trials: usize) -> Settings {
        let flags = Overrides {
            trials: Some(trials),
            seed: Some(4),
            ..Default::default()
        };
        Settings::resolve(&ExperimentConfig::default(), &flags).unwrap()
    }

    #[test]
    fn separates_sides_and_matches_closed_forms() {
        let r = run_sufficiency(&SufficiencyConfig::default(), &settings(20_000)).unwrap();
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        let t = r.table("sources").unwrap();
        for i in 0..2 {
            let m = t.number(i, "conditional_mean").unwrap();
            let se = t.number(i, "conditional_std_error").unwrap();
            let want = t.number(i, "expected_conditional_mean").unwrap();
            assert!((m - want).abs() < 4.0 * se, "{m} vs {want}");
            let frac = t.number(i, "acceptance_fraction").unwrap();
            assert!(frac > 0.0 && frac < 1.0);
            assert_eq!(t.number(i, "accepted"), Some(20_000.0));
        }
        let uncond = t.number(0, "unconditional_mean").unwrap();
        assert!((uncond - 1.0).abs() < 0.02, "{uncond}");
    }

    #[test]
    fn far_time_from_left_is_one_edge() {
        let mut rng = trial_rng(9, 0);
        let xs: Vec<f64> = (0..50_000).map(|_| far_time_from_left(&mut rng)).collect();
        let (m, _, se) = moments(&xs);
        assert!((m - 1.0).abs() < 4.0 * se);
    }

    #[test]
    fn deterministic_across_schedules() {
        let mut a = settings(3000);
        let r1 = run_sufficiency(&SufficiencyConfig::default(), &a).unwrap();
        a.exec = Execution::Sequential;
        let r2 = run_sufficiency(&SufficiencyConfig::default(), &a).unwrap();
        assert_eq!(r1, r2);
    }
}
