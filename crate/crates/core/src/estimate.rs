//! Source estimators: sup-norm fitting of candidate Laplace transforms to the
//! empirical transform (hat) or to the conditionally augmented statistic
//! (check).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::delay::{DelayError, EdgeDelays};
use crate::laplace::{CandidateTransform, CheckTransform, EmpiricalTransform, LaplaceError};
use crate::parallel::{map_indexed, Execution};
use crate::reduction::{reduce, ReductionError};
use crate::sim::{Observation, ObserverSet, SimError};
use crate::tree::{NodeId, Tree, TreeError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Laplace(#[from] LaplaceError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Delay(#[from] DelayError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("no candidate sources")]
    EmptyCandidates,
    #[error("mean observed time must be positive, got {0}")]
    DegenerateScale(f64),
}

/// Discretization of the supremum over `t ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Number of log-spaced magnitude levels.
    pub magnitudes: usize,
    pub min_magnitude: f64,
    pub max_magnitude: f64,
    /// Seeded random nonnegative unit directions, on top of the axes and the
    /// all-ones direction.
    pub random_directions: usize,
    /// Rounds of per-coordinate golden-section refinement.
    pub refine_rounds: usize,
    /// Golden-section steps per coordinate search.
    pub golden_steps: usize,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            magnitudes: 8,
            min_magnitude: 1e-2,
            max_magnitude: 1e2,
            random_directions: 8,
            refine_rounds: 2,
            golden_steps: 24,
            seed: 0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.magnitudes == 0 {
            return Err("grid needs at least one magnitude".into());
        }
        if !(self.min_magnitude > 0.0
            && self.max_magnitude >= self.min_magnitude
            && self.max_magnitude.is_finite())
        {
            return Err("grid magnitudes must satisfy 0 < min <= max < inf".into());
        }
        Ok(())
    }

    pub fn magnitude_levels(&self) -> Vec<f64> {
        if self.magnitudes == 1 {
            return vec![(self.min_magnitude * self.max_magnitude).sqrt()];
        }
        let (lo, hi) = (self.min_magnitude.ln(), self.max_magnitude.ln());
        (0..self.magnitudes)
            .map(|i| (lo + (hi - lo) * i as f64 / (self.magnitudes - 1) as f64).exp())
            .collect()
    }

    /// Unit axes, the normalized all-ones vector and seeded random
    /// nonnegative unit vectors, without exact duplicates.
    pub fn directions(&self, dim: usize) -> Vec<Vec<f64>> {
        let mut dirs: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                let mut d = vec![0.0; dim];
                d[i] = 1.0;
                d
            })
            .collect();
        let push = |d: Vec<f64>, dirs: &mut Vec<Vec<f64>>| {
            if !dirs.contains(&d) {
                dirs.push(d);
            }
        };
        push(normalized(vec![1.0; dim]), &mut dirs);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.random_directions {
            // Exponential coordinates give a uniform direction on the simplex.
            let raw: Vec<f64> = (0..dim)
                .map(|_| -(1.0 - rng.random::<f64>()).ln())
                .collect();
            push(normalized(raw), &mut dirs);
        }
        dirs
    }

    /// Coarse grid points `m·d/scale`.
    pub fn points(&self, dim: usize, scale: f64) -> Vec<Vec<f64>> {
        let mags = self.magnitude_levels();
        self.directions(dim)
            .iter()
            .flat_map(|d| {
                mags.iter()
                    .map(move |&m| d.iter().map(|x| x * m / scale).collect())
            })
            .collect()
    }
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Maximizes `h` on `[lo, hi]` by golden-section search, returning the best
/// `(x, h(x))` among the probes.
fn golden_max(mut h: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, steps: usize) -> (f64, f64) {
    let mut x1 = hi - INV_GOLDEN * (hi - lo);
    let mut x2 = lo + INV_GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (h(x1), h(x2));
    let mut best = if f2 > f1 { (x2, f2) } else { (x1, f1) };
    for _ in 0..steps {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_GOLDEN * (hi - lo);
            f2 = h(x2);
            if f2 > best.1 {
                best = (x2, f2);
            }
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_GOLDEN * (hi - lo);
            f1 = h(x1);
            if f1 > best.1 {
                best = (x1, f1);
            }
        }
    }
    best
}

/// `max |f(t) − g(t)|` over the grid, refined around the best grid point.
pub fn sup_distance<F, G>(f: F, g: G, dim: usize, grid: &GridSpec, scale: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> f64,
{
    let gap = |t: &[f64]| (f(t) - g(t)).abs();
    let mut best = 0.0;
    let mut best_t = vec![0.0; dim];
    for t in grid.points(dim, scale) {
        let v = gap(&t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    for _ in 0..grid.refine_rounds {
        let upper = 2.0 * best_t.iter().fold(0.0f64, |m, &x| m.max(x));
        if upper <= 0.0 {
            break;
        }
        for i in 0..dim {
            let mut probe = best_t.clone();
            let (x, v) = golden_max(
                |x| {
                    probe[i] = x;
                    gap(&probe)
                },
                0.0,
                upper,
                grid.golden_steps,
            );
            if v > best {
                best = v;
                best_t[i] = x;
            }
        }
    }
    best
}

/// Settings shared by both estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOptions {
    pub grid: GridSpec,
    /// Restrict candidates to the feasible classes and observers to their
    /// boundary.
    pub use_reduction: bool,
    /// Scheduling of per-candidate evaluations.
    pub exec: Execution,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            grid: GridSpec::default(),
            use_reduction: true,
            exec: Execution::Sequential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Hat,
    Check,
}

/// Outcome of one source estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub estimator: Estimator,
    /// Smallest node among `ties`.
    pub selected: NodeId,
    /// Every candidate attaining the minimum distance exactly.
    pub ties: Vec<NodeId>,
    pub per_candidate: BTreeMap<NodeId, f64>,
    pub candidates_considered: Vec<NodeId>,
    pub observers_used: Vec<NodeId>,
    pub grid_points_used: usize,
    pub reduction_applied: bool,
    pub warnings: Vec<String>,
}

struct Setup {
    candidates: Vec<NodeId>,
    observers: Vec<NodeId>,
    warnings: Vec<String>,
}

fn setup(
    tree: &Tree,
    observers: &ObserverSet,
    obs: &Observation,
    use_reduction: bool,
) -> Result<Setup, EstimateError> {
    if !use_reduction {
        return Ok(Setup {
            candidates: observers.non_observers(),
            observers: observers.nodes().to_vec(),
            warnings: vec![],
        });
    }
    let r = reduce(tree, observers, obs)?;
    let mut warnings = Vec::new();
    if let Some(center) = r.arrangement.center {
        warnings.push(format!(
            "feasible classes meet at observer {center}; transforms ignore the conditioning on its being first"
        ));
    }
    Ok(Setup {
        candidates: r.candidates,
        observers: r.sufficient,
        warnings,
    })
}

fn scale_of(times: &[f64]) -> Result<f64, EstimateError> {
    let scale = times.iter().sum::<f64>() / times.len() as f64;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(EstimateError::DegenerateScale(scale));
    }
    Ok(scale)
}

fn assemble(
    estimator: Estimator,
    setup: Setup,
    distances: Vec<f64>,
    grid_points_used: usize,
    reduction_applied: bool,
) -> Result<EstimateReport, EstimateError> {
    let min = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let ties: Vec<NodeId> = setup
        .candidates
        .iter()
        .zip(&distances)
        .filter(|(_, &d)| d == min)
        .map(|(&v, _)| v)
        .collect();
    let selected = *ties.first().ok_or(EstimateError::EmptyCandidates)?;
    Ok(EstimateReport {
        estimator,
        selected,
        ties,
        per_candidate: setup.candidates.iter().copied().zip(distances).collect(),
        candidates_considered: setup.candidates,
        observers_used: setup.observers,
        grid_points_used,
        reduction_applied,
        warnings: setup.warnings,
    })
}

/// Source-hat estimate from a single observation.
pub fn hat_estimate(
    tree: &Tree,
    observers: &ObserverSet,
    delays: &EdgeDelays,
    obs: &Observation,
    opts: &EstimateOptions,
) -> Result<EstimateReport, EstimateError> {
    delays.check_len(tree.n_edges())?;
    let setup = setup(tree, observers, obs, opts.use_reduction)?;
    let taus = obs.vector(&setup.observers)?;
    hat_from_samples(tree, delays, setup, vec![taus], opts)
}

/// Source-hat estimate from several independent outbreaks observed at the
/// same observers (no reduction).
pub fn hat_estimate_samples(
    tree: &Tree,
    observers: &ObserverSet,
    delays: &EdgeDelays,
    samples: &[Observation],
    opts: &EstimateOptions,
) -> Result<EstimateReport, EstimateError> {
    delays.check_len(tree.n_edges())?;
    let setup = Setup {
        candidates: observers.non_observers(),
        observers: observers.nodes().to_vec(),
        warnings: vec![],
    };
    let vectors = samples
        .iter()
        .map(|s| s.vector(&setup.observers))
        .collect::<Result<Vec<_>, _>>()?;
    if vectors.is_empty() {
        return Err(LaplaceError::NoSamples.into());
    }
    hat_from_samples(
        tree,
        delays,
        setup,
        vectors,
        &EstimateOptions {
            use_reduction: false,
            ..opts.clone()
        },
    )
}

fn hat_from_samples(
    tree: &Tree,
    delays: &EdgeDelays,
    setup: Setup,
    samples: Vec<Vec<f64>>,
    opts: &EstimateOptions,
) -> Result<EstimateReport, EstimateError> {
    if setup.candidates.is_empty() {
        return Err(EstimateError::EmptyCandidates);
    }
    let all: Vec<f64> = samples.iter().flatten().copied().collect();
    let scale = scale_of(&all)?;
    let dim = setup.observers.len();
    let empirical = EmpiricalTransform::new(samples)?;
    let transforms = setup
        .candidates
        .iter()
        .map(|&v| CandidateTransform::new(tree, &setup.observers, delays, v))
        .collect::<Result<Vec<_>, _>>()?;
    let distances = map_indexed(opts.exec, transforms.len(), |i| {
        sup_distance(
            |t| empirical.eval(t),
            |t| transforms[i].eval(t),
            dim,
            &opts.grid,
            scale,
        )
    });
    let points = opts.grid.points(dim, scale).len();
    assemble(Estimator::Hat, setup, distances, points, opts.use_reduction)
}

/// Source-check estimate; every edge delay must be exponential.
pub fn check_estimate(
    tree: &Tree,
    observers: &ObserverSet,
    delays: &EdgeDelays,
    obs: &Observation,
    opts: &EstimateOptions,
) -> Result<EstimateReport, EstimateError> {
    delays.check_len(tree.n_edges())?;
    let rates = delays.exponential_rates()?;
    let setup = setup(tree, observers, obs, opts.use_reduction)?;
    if setup.candidates.is_empty() {
        return Err(EstimateError::EmptyCandidates);
    }
    let taus = obs.vector(&setup.observers)?;
    let scale = scale_of(&taus)?;
    let dim = setup.observers.len();
    let pairs = setup
        .candidates
        .iter()
        .map(|&v| {
            Ok((
                CheckTransform::new(tree, &setup.observers, &rates, v, &taus)?,
                CandidateTransform::new(tree, &setup.observers, delays, v)?,
            ))
        })
        .collect::<Result<Vec<_>, LaplaceError>>()?;
    let distances = map_indexed(opts.exec, pairs.len(), |i| {
        let (check, analytic) = &pairs[i];
        sup_distance(
            |t| check.eval(t),
            |t| analytic.eval(t),
            dim,
            &opts.grid,
            scale,
        )
    });
    let points = opts.grid.points(dim, scale).len();
    assemble(
        Estimator::Check,
        setup,
        distances,
        points,
        opts.use_reduction,
    )
}

/// Number of edges between the estimate and the true source.
pub fn edge_distance_error(
    tree: &Tree,
    estimate: NodeId,
    truth: NodeId,
) -> Result<usize, EstimateError> {
    Ok(tree.distance(estimate, truth)?)
}
