//! Laplace transforms of the observer time vector: the analytic transform
//! under each candidate source, the empirical transform, and the
//! conditionally augmented statistic for exponential delays.

use thiserror::Error;

use crate::delay::hypoexp::ln_simplex_exp;
use crate::delay::{DelayError, DelayModel, EdgeDelays};
use crate::tree::{EdgeId, NodeId, Tree, TreeError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LaplaceError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Delay(#[from] DelayError),
    #[error("candidate {0} is an observer")]
    CandidateIsObserver(NodeId),
    #[error("conditioning time must be positive, got {0}")]
    DegenerateTime(f64),
    #[error("no samples")]
    NoSamples,
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("node {0} is not an observer")]
    UnknownObserver(NodeId),
    #[error("Laplace argument coordinate {0} is not a nonnegative number")]
    NegativeArgument(f64),
}

/// Argument `t ≥ 0` of a multivariate Laplace transform, one coordinate per
/// observer.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceArgument(Vec<f64>);

impl LaplaceArgument {
    pub fn new(t: Vec<f64>) -> Result<Self, LaplaceError> {
        if let Some(&bad) = t.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(LaplaceError::NegativeArgument(bad));
        }
        Ok(LaplaceArgument(t))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// 0/1 matrix `A_v` (observers × edges): row `o` marks the edges of `[v, o]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathIncidence {
    pub candidate: NodeId,
    observers: Vec<NodeId>,
    n_edges: usize,
    /// Edges of `[v, o]` for each observer, ordered from the observer.
    rows: Vec<Vec<EdgeId>>,
    /// Observer indices whose path uses each edge.
    columns: Vec<Vec<usize>>,
}

impl PathIncidence {
    pub fn new(tree: &Tree, observers: &[NodeId], v: NodeId) -> Result<Self, LaplaceError> {
        tree.check_node(v)?;
        for &o in observers {
            tree.check_node(o)?;
        }
        if observers.contains(&v) {
            return Err(LaplaceError::CandidateIsObserver(v));
        }
        let rooted = tree.rooted_at(v);
        let rows: Vec<Vec<EdgeId>> = observers.iter().map(|&o| rooted.edges_to_root(o)).collect();
        let mut columns = vec![Vec::new(); tree.n_edges()];
        for (i, row) in rows.iter().enumerate() {
            for &e in row {
                columns[e].push(i);
            }
        }
        Ok(PathIncidence {
            candidate: v,
            observers: observers.to_vec(),
            n_edges: tree.n_edges(),
            rows,
            columns,
        })
    }

    pub fn observers(&self) -> &[NodeId] {
        &self.observers
    }

    pub fn row(&self, i: usize) -> &[EdgeId] {
        &self.rows[i]
    }

    /// Indices (into [`observers`](Self::observers)) of the observers whose
    /// path from the candidate crosses `e`.
    pub fn column(&self, e: EdgeId) -> &[usize] {
        &self.columns[e]
    }

    pub fn dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut r = vec![0u8; self.n_edges];
                for &e in row {
                    r[e] = 1;
                }
                r
            })
            .collect()
    }

    /// `(t A_v)(e)` for every edge.
    pub fn edge_loads(&self, t: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|col| col.iter().map(|&i| t[i]).sum())
            .collect()
    }
}

/// Product of factors taken in ascending order, so that equal multisets of
/// factors give bit-identical results.
fn sorted_product(factors: &mut [f64]) -> f64 {
    factors.sort_unstable_by(f64::total_cmp);
    factors.iter().product()
}

fn check_dimension(expected: usize, got: usize) -> Result<(), LaplaceError> {
    if expected != got {
        return Err(LaplaceError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `φ_v` prepared for repeated evaluation: only edges crossed by at least
/// one observer path are kept.
#[derive(Debug, Clone)]
pub struct CandidateTransform {
    pub candidate: NodeId,
    dim: usize,
    edges: Vec<(DelayModel, Vec<usize>)>,
}

impl CandidateTransform {
    pub fn new(
        tree: &Tree,
        observers: &[NodeId],
        delays: &EdgeDelays,
        v: NodeId,
    ) -> Result<Self, LaplaceError> {
        delays.check_len(tree.n_edges())?;
        let inc = PathIncidence::new(tree, observers, v)?;
        Ok(Self::from_incidence(&inc, delays))
    }

    pub fn from_incidence(inc: &PathIncidence, delays: &EdgeDelays) -> Self {
        let edges = (0..inc.n_edges)
            .filter(|&e| !inc.columns[e].is_empty())
            .map(|e| (*delays.get(e), inc.columns[e].clone()))
            .collect();
        CandidateTransform {
            candidate: inc.candidate,
            dim: inc.observers.len(),
            edges,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `∏_e φ_e((tA_v)(e))`; `t` must be nonnegative with one entry per
    /// observer.
    pub fn eval(&self, t: &[f64]) -> f64 {
        let mut factors: Vec<f64> = self
            .edges
            .iter()
            .filter_map(|(model, col)| {
                let load: f64 = col.iter().map(|&i| t[i]).sum();
                (load > 0.0).then(|| model.laplace_unchecked(load))
            })
            .collect();
        sorted_product(&mut factors)
    }
}

/// Analytic Laplace transform of the observer times when the source is `v`.
pub fn candidate_laplace(
    tree: &Tree,
    observers: &[NodeId],
    delays: &EdgeDelays,
    v: NodeId,
    t: &LaplaceArgument,
) -> Result<f64, LaplaceError> {
    check_dimension(observers.len(), t.0.len())?;
    Ok(CandidateTransform::new(tree, observers, delays, v)?.eval(&t.0))
}

/// Empirical transform `(1/k) Σ_i e^{-⟨t, τ_i⟩}` of observed time vectors.
#[derive(Debug, Clone)]
pub struct EmpiricalTransform {
    samples: Vec<Vec<f64>>,
}

impl EmpiricalTransform {
    pub fn new(samples: Vec<Vec<f64>>) -> Result<Self, LaplaceError> {
        let first = samples.first().ok_or(LaplaceError::NoSamples)?;
        let dim = first.len();
        for s in &samples {
            check_dimension(dim, s.len())?;
        }
        Ok(EmpiricalTransform { samples })
    }

    pub fn dim(&self) -> usize {
        self.samples[0].len()
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        let total: f64 = self.samples.iter().map(|tau| (-dot(t, tau)).exp()).sum();
        total / self.samples.len() as f64
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn empirical_laplace(samples: &[Vec<f64>], t: &LaplaceArgument) -> Result<f64, LaplaceError> {
    let emp = EmpiricalTransform::new(samples.to_vec())?;
    check_dimension(emp.dim(), t.0.len())?;
    Ok(emp.eval(&t.0))
}

/// `E[exp(-Σ c_i X_i) | Σ X_i = τ]` for independent `X_i ~ Exp(λ_i)`,
/// with `ln_denominator = ln I(λ; τ)` precomputed.
fn tilted_ratio(rates: &[f64], loads: &[f64], tau: f64, ln_denominator: f64) -> f64 {
    let tilted: Vec<f64> = rates.iter().zip(loads).map(|(l, c)| l + c).collect();
    (ln_simplex_exp(&tilted, tau) - ln_denominator).exp()
}

/// `E[exp(-Σ c_i X_i) | Σ X_i = τ]` for independent `X_i ~ Exp(rates[i])`
/// and tilts `loads[i] = c_i ≥ 0`.
pub fn conditional_factor_exponential(
    rates: &[f64],
    loads: &[f64],
    tau: f64,
) -> Result<f64, LaplaceError> {
    check_dimension(rates.len(), loads.len())?;
    if rates.is_empty() {
        return Err(DelayError::EmptyRates.into());
    }
    if let Some(&bad) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(
            DelayError::InvalidParameter(format!("rate must be positive, got {bad}")).into(),
        );
    }
    if let Some(&bad) = loads.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(LaplaceError::NegativeArgument(bad));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(LaplaceError::DegenerateTime(tau));
    }
    Ok(tilted_ratio(rates, loads, tau, ln_simplex_exp(rates, tau)))
}

/// `φ̌_v` and the conditional transforms `φ_v(·|τ_o)` for exponential delays,
/// prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CheckTransform {
    pub candidate: NodeId,
    taus: Vec<f64>,
    /// `(rate, observer indices)` of every edge crossed by some path.
    edges: Vec<(f64, Vec<usize>)>,
    /// For each observer, indices into `edges` of the edges on `[v, o]`.
    paths: Vec<Vec<usize>>,
    ln_denominators: Vec<f64>,
}

impl CheckTransform {
    /// `rates[e]` is the exponential rate of edge `e`; `taus[i]` is the
    /// observed time of `observers[i]`.
    pub fn new(
        tree: &Tree,
        observers: &[NodeId],
        rates: &[f64],
        v: NodeId,
        taus: &[f64],
    ) -> Result<Self, LaplaceError> {
        check_dimension(tree.n_edges(), rates.len())?;
        check_dimension(observers.len(), taus.len())?;
        if let Some(&bad) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(
                DelayError::InvalidParameter(format!("rate must be positive, got {bad}")).into(),
            );
        }
        if let Some(&bad) = taus.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(LaplaceError::DegenerateTime(bad));
        }
        let inc = PathIncidence::new(tree, observers, v)?;
        let used: Vec<EdgeId> = (0..tree.n_edges())
            .filter(|&e| !inc.columns[e].is_empty())
            .collect();
        let slot = |e: EdgeId| used.binary_search(&e).expect("path edges are used");
        let edges = used
            .iter()
            .map(|&e| (rates[e], inc.columns[e].clone()))
            .collect();
        let paths: Vec<Vec<usize>> = inc
            .rows
            .iter()
            .map(|row| row.iter().map(|&e| slot(e)).collect())
            .collect();
        let ln_denominators = inc
            .rows
            .iter()
            .zip(taus)
            .map(|(row, &tau)| {
                let path_rates: Vec<f64> = row.iter().map(|&e| rates[e]).collect();
                ln_simplex_exp(&path_rates, tau)
            })
            .collect();
        Ok(CheckTransform {
            candidate: v,
            taus: taus.to_vec(),
            edges,
            paths,
            ln_denominators,
        })
    }

    pub fn dim(&self) -> usize {
        self.taus.len()
    }

    fn loads(&self, t: &[f64]) -> Vec<f64> {
        self.edges
            .iter()
            .map(|(_, col)| col.iter().map(|&i| t[i]).sum())
            .collect()
    }

    fn conditional_with_loads(&self, i: usize, loads: &[f64]) -> f64 {
        let path = &self.paths[i];
        let mut factors: Vec<f64> = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(j, _)| loads[j] > 0.0 && !path.contains(&j))
            .map(|(j, &(rate, _))| rate / (rate + loads[j]))
            .collect();
        let path_rates: Vec<f64> = path.iter().map(|&j| self.edges[j].0).collect();
        let path_loads: Vec<f64> = path.iter().map(|&j| loads[j]).collect();
        if path_loads.iter().any(|&c| c > 0.0) {
            factors.push(tilted_ratio(
                &path_rates,
                &path_loads,
                self.taus[i],
                self.ln_denominators[i],
            ));
        }
        sorted_product(&mut factors)
    }

    /// `φ_v(t | τ_o)` for the observer at index `i`.
    pub fn conditional(&self, i: usize, t: &[f64]) -> f64 {
        self.conditional_with_loads(i, &self.loads(t))
    }

    /// `φ̌_v(t)`.
    pub fn eval(&self, t: &[f64]) -> f64 {
        let loads = self.loads(t);
        let raw = (-dot(t, &self.taus)).exp();
        let conditionals: Vec<f64> = (0..self.dim())
            .map(|i| self.conditional_with_loads(i, &loads))
            .collect();
        combine(raw, &conditionals)
    }
}

fn combine(raw: f64, conditionals: &[f64]) -> f64 {
    let d = conditionals.len() as f64;
    ((d - 1.0) * raw + conditionals.iter().sum::<f64>()) / (2.0 * d - 1.0)
}

/// `((d−1)·raw + Σ conditionals) / (2d−1)`.
pub fn hajek_combine(raw: f64, conditionals: &[f64], d: usize) -> Result<f64, LaplaceError> {
    if d == 0 || conditionals.len() != d {
        return Err(LaplaceError::DimensionMismatch {
            expected: d,
            got: conditionals.len(),
        });
    }
    Ok(combine(raw, conditionals))
}

/// Index of `o` in `observers`.
fn observer_index(observers: &[NodeId], o: NodeId) -> Result<usize, LaplaceError> {
    observers
        .iter()
        .position(|&x| x == o)
        .ok_or(LaplaceError::UnknownObserver(o))
}

/// `φ_v(t | τ_o)` under exponential delays: unconditional factors off the
/// path `[v, o]` times the conditional factor on the path.
#[allow(clippy::too_many_arguments)]
pub fn conditional_laplace_exponential(
    tree: &Tree,
    observers: &[NodeId],
    delays: &EdgeDelays,
    v: NodeId,
    o: NodeId,
    tau_o: f64,
    t: &LaplaceArgument,
) -> Result<f64, LaplaceError> {
    check_dimension(observers.len(), t.0.len())?;
    if !(tau_o > 0.0) {
        return Err(LaplaceError::DegenerateTime(tau_o));
    }
    let rates = delays.exponential_rates()?;
    let i = observer_index(observers, o)?;
    // Only τ_o enters the conditional for observer `o`; the other times are
    // placeholders.
    let mut taus = vec![1.0; observers.len()];
    taus[i] = tau_o;
    Ok(CheckTransform::new(tree, observers, &rates, v, &taus)?.conditional(i, &t.0))
}

/// Variance-reduced estimate `φ̌_v(t)` of `φ_v(t)` from one observation
/// (`taus[i]` is the time of `observers[i]`).
pub fn check_statistic(
    tree: &Tree,
    observers: &[NodeId],
    delays: &EdgeDelays,
    v: NodeId,
    taus: &[f64],
    t: &LaplaceArgument,
) -> Result<f64, LaplaceError> {
    check_dimension(observers.len(), t.0.len())?;
    let rates = delays.exponential_rates()?;
    Ok(CheckTransform::new(tree, observers, &rates, v, taus)?.eval(&t.0))
}
