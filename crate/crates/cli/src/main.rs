use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use treelocate_cli::config::{
    EstimatorChoice, ExperimentConfig, ExperimentKind, Format, Overrides, Settings,
};
use treelocate_cli::emit::{emit, Report};
use treelocate_cli::error::CliError;
use treelocate_cli::experiments::{self, ScalingSweep};

#[derive(Parser, Debug)]
#[command(
    name = "treelocate",
    version,
    about = "Locate the source of a spreading process on a tree from a few observed infection times"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; every result is a function of it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trials per experiment cell.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Use 1000 trials per cell unless a count is given explicitly.
    #[arg(long, global = true)]
    paper_scale: bool,
    /// Score every non-observer with every observer.
    #[arg(long, global = true)]
    no_reduction: bool,
    /// Worker threads; 1 runs everything on the main thread.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Confusion matrices on a path with one observer.
    Confusion,
    /// Error against tree size and against observer count.
    Scaling,
    /// Error normalized by the tree diameter for several delay laws.
    Normalized,
    /// Outbreak at the outlet of a river network.
    River {
        /// Network file with lines `u v mu sigma`.
        #[arg(long, value_name = "PATH")]
        network: Option<PathBuf>,
        /// Write the bundled synthetic network to PATH and exit.
        #[arg(long, value_name = "PATH")]
        write_network: Option<PathBuf>,
    },
    /// Paired comparison of the two estimators.
    CheckVsHat,
    /// Triangle network census against closed forms.
    Triangle,
    /// Conditional far-observer times on the two-sided star.
    Sufficiency,
    /// Estimate the source for one observation file.
    Estimate {
        /// Network file with lines `u v [mu sigma]`.
        #[arg(long, value_name = "PATH")]
        network: Option<PathBuf>,
        /// JSON map from observer label to infection time.
        #[arg(long, value_name = "PATH")]
        observations: Option<PathBuf>,
        #[arg(long, value_enum)]
        estimator: Option<EstimatorChoice>,
    },
}

impl Command {
    fn accepts(&self, kind: ExperimentKind) -> bool {
        use ExperimentKind as K;
        matches!(
            (self, kind),
            (Command::Confusion, K::Confusion)
                | (Command::Scaling, K::ScalingNodes | K::ScalingObservers)
                | (Command::Normalized, K::NormalizedDiameter)
                | (Command::River { .. }, K::River)
                | (Command::CheckVsHat, K::CheckVsHat)
                | (Command::Triangle, K::Triangle)
                | (Command::Sufficiency, K::SufficiencyDemo)
                | (Command::Estimate { .. }, K::Estimate)
        )
    }
}

fn run(cli: Cli) -> Result<Report, CliError> {
    let mut config = match &cli.common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(kind) = config.experiment {
        if !cli.command.accepts(kind) {
            return Err(CliError::Config(format!(
                "config is for experiment {kind:?}, not this subcommand"
            )));
        }
    }
    let flags = Overrides {
        seed: cli.common.seed,
        trials: cli.common.trials,
        out: cli.common.out.clone(),
        format: cli.common.format,
        paper_scale: cli.common.paper_scale,
        no_reduction: cli.common.no_reduction,
        threads: cli.common.threads,
    };
    let settings = Settings::resolve(&config, &flags)?;
    #[cfg(feature = "parallel")]
    if let Some(n) = flags.threads {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let report = match cli.command {
        Command::Confusion => experiments::run_confusion(&config.confusion, &settings)?,
        Command::Scaling => {
            let sweeps: &[ScalingSweep] = match config.experiment {
                Some(ExperimentKind::ScalingNodes) => &[ScalingSweep::Nodes],
                Some(ExperimentKind::ScalingObservers) => &[ScalingSweep::Observers],
                _ => &[ScalingSweep::Nodes, ScalingSweep::Observers],
            };
            experiments::run_scaling(&config.scaling, sweeps, &settings)?
        }
        Command::Normalized => experiments::run_normalized(&config.normalized, &settings)?,
        Command::River {
            network,
            write_network,
        } => {
            if let Some(path) = write_network {
                let text = experiments::synthetic_river_text();
                std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
                return Ok(Report::new("river"));
            }
            if network.is_some() {
                config.river.network = network;
            }
            experiments::run_river(&config.river, &settings)?
        }
        Command::CheckVsHat => experiments::run_check_vs_hat(&config.check_vs_hat, &settings)?,
        Command::Triangle => experiments::run_triangle(&config.triangle, &settings)?,
        Command::Sufficiency => experiments::run_sufficiency(&config.sufficiency, &settings)?,
        Command::Estimate {
            network,
            observations,
            estimator,
        } => {
            let cfg = &mut config.estimate;
            cfg.network = network.or(cfg.network.take());
            cfg.observations = observations.or(cfg.observations.take());
            cfg.estimator = estimator.unwrap_or(cfg.estimator);
            experiments::run_estimate(cfg, &settings)?
        }
    };
    let format = settings
        .format
        .unwrap_or(if report.experiment == "estimate" {
            Format::Json
        } else {
            Format::Csv
        });
    if report.tables.is_empty() && report.summary.is_empty() {
        return Ok(report);
    }
    let written = emit(&report, format, settings.out.as_deref())?;
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    if format == Format::Csv {
        eprint!("{}", report.summary_lines());
    } else {
        for f in &report.failures {
            eprintln!("FAILED: {f}");
        }
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                CliError::EXIT_CONFIG
            } else {
                0
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(report) if report.failures.is_empty() => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(CliError::EXIT_VALIDATION as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
