//! Edge-delay distributions on `[0, ∞)`: sampling, densities and closed-form
//! Laplace transforms.

pub mod hypoexp;
pub mod special;

use std::f64::consts::{FRAC_2_PI, PI};

use rand::Rng;
use rand_distr::{Cauchy, Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hypoexp::{hypoexp_density, hypoexp_density_distinct, ln_hypoexp_density, RateList};
pub use special::{cosine_integral, sine_integral};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DelayError {
    #[error("argument must be nonnegative, got {0}")]
    NegativeArgument(f64),
    #[error("argument must be positive, got {0}")]
    NonpositiveArgument(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("rate list is empty")]
    EmptyRates,
    #[error("edge {edge} does not have an exponential delay")]
    UnsupportedDelayModel { edge: usize },
    #[error("expected {expected} per-edge delays, got {got}")]
    EdgeCountMismatch { expected: usize, got: usize },
}

/// Delay law of a single edge. Parameters are in time units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "RawDelayModel")]
pub enum DelayModel {
    Exponential {
        rate: f64,
    },
    /// Normal(mean, std²) conditioned on being nonnegative.
    PosNormal {
        mean: f64,
        std: f64,
    },
    Uniform {
        lower: f64,
        upper: f64,
    },
    /// `|X|` for `X ~ Cauchy(0, scale)`.
    AbsCauchy {
        scale: f64,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawDelayModel {
    Exponential { rate: f64 },
    PosNormal { mean: f64, std: f64 },
    Uniform { lower: f64, upper: f64 },
    AbsCauchy { scale: f64 },
}

impl TryFrom<RawDelayModel> for DelayModel {
    type Error = DelayError;

    fn try_from(raw: RawDelayModel) -> Result<Self, Self::Error> {
        match raw {
            RawDelayModel::Exponential { rate } => DelayModel::exponential(rate),
            RawDelayModel::PosNormal { mean, std } => DelayModel::pos_normal(mean, std),
            RawDelayModel::Uniform { lower, upper } => DelayModel::uniform(lower, upper),
            RawDelayModel::AbsCauchy { scale } => DelayModel::abs_cauchy(scale),
        }
    }
}

fn positive(name: &str, x: f64) -> Result<(), DelayError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(DelayError::InvalidParameter(format!(
            "{name} must be positive, got {x}"
        )))
    }
}

impl DelayModel {
    pub fn exponential(rate: f64) -> Result<Self, DelayError> {
        positive("rate", rate)?;
        Ok(DelayModel::Exponential { rate })
    }

    pub fn pos_normal(mean: f64, std: f64) -> Result<Self, DelayError> {
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(DelayError::InvalidParameter(format!(
                "mean must be >= 0, got {mean}"
            )));
        }
        positive("std", std)?;
        Ok(DelayModel::PosNormal { mean, std })
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self, DelayError> {
        if !(lower.is_finite() && upper.is_finite() && lower >= 0.0 && upper > lower) {
            return Err(DelayError::InvalidParameter(format!(
                "uniform bounds need 0 <= lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(DelayModel::Uniform { lower, upper })
    }

    pub fn abs_cauchy(scale: f64) -> Result<Self, DelayError> {
        positive("scale", scale)?;
        Ok(DelayModel::AbsCauchy { scale })
    }

    /// Same law with time measured in units `c` times smaller, i.e. the law
    /// of `c·X`.
    pub fn rescaled(&self, c: f64) -> Self {
        match *self {
            DelayModel::Exponential { rate } => DelayModel::Exponential { rate: rate / c },
            DelayModel::PosNormal { mean, std } => DelayModel::PosNormal {
                mean: mean * c,
                std: std * c,
            },
            DelayModel::Uniform { lower, upper } => DelayModel::Uniform {
                lower: lower * c,
                upper: upper * c,
            },
            DelayModel::AbsCauchy { scale } => DelayModel::AbsCauchy { scale: scale * c },
        }
    }

    /// Short label such as `posnormal(1,0.25)`.
    pub fn label(&self) -> String {
        match *self {
            DelayModel::Exponential { rate } => format!("exponential({rate})"),
            DelayModel::PosNormal { mean, std } => format!("posnormal({mean},{std})"),
            DelayModel::Uniform { lower, upper } => format!("uniform({lower},{upper})"),
            DelayModel::AbsCauchy { scale } => format!("abscauchy({scale})"),
        }
    }

    /// `E[exp(-t X)]`.
    pub fn laplace(&self, t: f64) -> Result<f64, DelayError> {
        if t.is_nan() || t < 0.0 {
            return Err(DelayError::NegativeArgument(t));
        }
        Ok(self.laplace_unchecked(t))
    }

    /// [`laplace`](Self::laplace) without the argument check, for hot loops
    /// whose arguments are nonnegative by construction.
    pub fn laplace_unchecked(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 1.0;
        }
        match *self {
            DelayModel::Exponential { rate } => rate / (rate + t),
            DelayModel::PosNormal { mean, std } => {
                let a = mean / std;
                let x = a - std * t;
                let ln_value = if x >= -5.0 {
                    special::ln_normal_cdf(x) - mean * t + 0.5 * std * std * t * t
                } else {
                    // The quadratic terms cancel against the Gaussian factor
                    // of the Mills-ratio form of Φ(x).
                    -0.5 * a * a - 0.5 * (2.0 * PI).ln() + special::ln_mills_ratio(-x)
                };
                (ln_value - special::ln_normal_cdf(a)).exp()
            }
            DelayModel::Uniform { lower, upper } => {
                let width = upper - lower;
                (-lower * t).exp() * -(-width * t).exp_m1() / (width * t)
            }
            DelayModel::AbsCauchy { scale } => FRAC_2_PI * special::auxiliary_f(t * scale),
        }
    }

    pub fn density(&self, x: f64) -> Result<f64, DelayError> {
        if x.is_nan() || x < 0.0 {
            return Err(DelayError::NegativeArgument(x));
        }
        Ok(match *self {
            DelayModel::Exponential { rate } => rate * (-rate * x).exp(),
            DelayModel::PosNormal { mean, std } => {
                let z = (x - mean) / std;
                (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * std * special::normal_cdf(mean / std))
            }
            DelayModel::Uniform { lower, upper } => {
                if x >= lower && x <= upper {
                    1.0 / (upper - lower)
                } else {
                    0.0
                }
            }
            DelayModel::AbsCauchy { scale } => {
                let z = x / scale;
                FRAC_2_PI / (scale * (1.0 + z * z))
            }
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DelayModel::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
            DelayModel::PosNormal { mean, std } => {
                let normal = Normal::new(mean, std).expect("validated std");
                loop {
                    let x = normal.sample(rng);
                    if x >= 0.0 {
                        return x;
                    }
                }
            }
            DelayModel::Uniform { lower, upper } => rng.random_range(lower..upper),
            DelayModel::AbsCauchy { scale } => Cauchy::new(0.0, scale)
                .expect("validated scale")
                .sample(rng)
                .abs(),
        }
    }
}

/// One delay law per tree edge, indexed by edge id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeDelays(Vec<DelayModel>);

impl EdgeDelays {
    pub fn new(models: Vec<DelayModel>) -> Self {
        EdgeDelays(models)
    }

    /// The same law on every edge.
    pub fn iid(model: DelayModel, n_edges: usize) -> Self {
        EdgeDelays(vec![model; n_edges])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, edge: usize) -> &DelayModel {
        &self.0[edge]
    }

    pub fn models(&self) -> &[DelayModel] {
        &self.0
    }

    pub fn set(&mut self, edge: usize, model: DelayModel) {
        self.0[edge] = model;
    }

    pub fn check_len(&self, n_edges: usize) -> Result<(), DelayError> {
        if self.0.len() == n_edges {
            Ok(())
        } else {
            Err(DelayError::EdgeCountMismatch {
                expected: n_edges,
                got: self.0.len(),
            })
        }
    }

    pub fn rescaled(&self, c: f64) -> Self {
        EdgeDelays(self.0.iter().map(|m| m.rescaled(c)).collect())
    }

    /// Per-edge rates when every edge is exponential.
    pub fn exponential_rates(&self) -> Result<Vec<f64>, DelayError> {
        self.0
            .iter()
            .enumerate()
            .map(|(edge, m)| match *m {
                DelayModel::Exponential { rate } => Ok(rate),
                _ => Err(DelayError::UnsupportedDelayModel { edge }),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::trial_rng;
    use treelocate_oracles::integrate_to_infinity;

    fn all_models() -> Vec<DelayModel> {
        vec![
            DelayModel::exponential(1.0).unwrap(),
            DelayModel::pos_normal(1.0, 0.25).unwrap(),
            DelayModel::pos_normal(1.0, 1.0).unwrap(),
            DelayModel::uniform(0.0, 2.0).unwrap(),
            DelayModel::uniform(0.5, 1.5).unwrap(),
            DelayModel::abs_cauchy(1.0).unwrap(),
        ]
    }

    #[test]
    fn table_values() {
        let e = DelayModel::exponential(1.0).unwrap();
        assert_eq!(e.laplace(1.0).unwrap(), 0.5);
        let u = DelayModel::uniform(0.0, 2.0).unwrap();
        let want = (1.0 - (-2.0f64).exp()) / 2.0;
        assert!((u.laplace(1.0).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.432_332).abs() < 1e-6);
        for m in all_models() {
            assert_eq!(m.laplace(0.0).unwrap(), 1.0);
            assert!(matches!(
                m.laplace(-0.1),
                Err(DelayError::NegativeArgument(_))
            ));
        }
    }

    #[test]
    fn pos_normal_against_quadrature() {
        let m = DelayModel::pos_normal(1.0, 0.25).unwrap();
        let quad = integrate_to_infinity(|x| (-2.0 * x).exp() * m.density(x).unwrap(), 0.0, 1e-13);
        assert!((m.laplace(2.0).unwrap() - quad).abs() < 1e-8);
    }

    #[test]
    fn abs_cauchy_against_quadrature() {
        let m = DelayModel::abs_cauchy(1.0).unwrap();
        let quad = integrate_to_infinity(|x| (-x).exp() * FRAC_2_PI / (1.0 + x * x), 0.0, 1e-12);
        assert!((m.laplace(1.0).unwrap() - quad).abs() < 1e-6);
    }

    #[test]
    fn densities() {
        assert_eq!(
            DelayModel::exponential(1.0).unwrap().density(0.0).unwrap(),
            1.0
        );
        assert_eq!(
            DelayModel::uniform(0.0, 2.0).unwrap().density(3.0).unwrap(),
            0.0
        );
        let pn = DelayModel::pos_normal(1.0, 1.0).unwrap();
        let total = integrate_to_infinity(|x| pn.density(x).unwrap(), 0.0, 1e-12);
        assert!((total - 1.0).abs() < 1e-8);
        assert!(pn.density(-1.0).is_err());
    }

    #[test]
    fn transform_is_decreasing_on_grid() {
        for m in all_models() {
            let mut prev = 1.0;
            for i in 1..400 {
                let t = 0.05 * i as f64;
                let v = m.laplace(t).unwrap();
                assert!(v < prev && v > 0.0, "{m:?} at {t}: {v} !< {prev}");
                prev = v;
            }
            assert!(m.laplace(1e6).unwrap() < 1.0);
        }
    }

    #[test]
    fn pos_normal_far_tail_is_finite_and_continuous() {
        let m = DelayModel::pos_normal(1.0, 1.0).unwrap();
        // Switch between the two evaluation branches happens at t = 6.
        let below = m.laplace(6.0 - 1e-9).unwrap();
        let above = m.laplace(6.0 + 1e-9).unwrap();
        assert!((below - above).abs() < 1e-8 * below);
        let far = m.laplace(500.0).unwrap();
        assert!(far > 0.0 && far.is_finite());
        // Large-t behavior: density at zero over t.
        let want = m.density(0.0).unwrap() / 500.0;
        assert!((far - want).abs() / want < 1e-2);
    }

    #[test]
    fn samples_are_nonnegative_and_plausible() {
        let mut rng = trial_rng(11, 0);
        for m in all_models() {
            for _ in 0..10_000 {
                assert!(m.sample(&mut rng) >= 0.0);
            }
        }
        let u = DelayModel::uniform(0.0, 2.0).unwrap();
        let mean = (0..100_000).map(|_| u.sample(&mut rng)).sum::<f64>() / 1e5;
        assert!((mean - 1.0).abs() < 0.02);
        let e = DelayModel::exponential(1.0).unwrap();
        let tail = (0..100_000).filter(|_| e.sample(&mut rng) > 1.0).count() as f64 / 1e5;
        assert!((tail - (-1.0f64).exp()).abs() < 0.01);
    }

    #[test]
    fn abs_cauchy_median_stabilizes_but_mean_does_not() {
        let m = DelayModel::abs_cauchy(1.0).unwrap();
        let mut rng = trial_rng(5, 0);
        let mut xs: Vec<f64> = (0..200_000).map(|_| m.sample(&mut rng)).collect();
        let means: Vec<f64> = [1_000, 10_000, 100_000, 200_000]
            .iter()
            .map(|&n| xs[..n].iter().sum::<f64>() / n as f64)
            .collect();
        xs.sort_by(f64::total_cmp);
        let median = xs[xs.len() / 2];
        assert!((median - 1.0).abs() < 0.02);
        let spread = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - means.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread > 0.1, "running means {means:?}");
    }

    #[test]
    fn serde_round_trip_and_validation() {
        let m: DelayModel =
            serde_json::from_str(r#"{"kind":"posnormal","mean":1.0,"std":0.25}"#).unwrap();
        assert_eq!(
            m,
            DelayModel::PosNormal {
                mean: 1.0,
                std: 0.25
            }
        );
        assert!(DelayModel::uniform(2.0, 1.0).is_err());
        assert!(serde_json::from_str::<DelayModel>(r#"{"kind":"exponential","rate":-1}"#).is_err());
        let text = serde_json::to_string(&DelayModel::abs_cauchy(2.0).unwrap()).unwrap();
        assert_eq!(text, r#"{"kind":"abscauchy","scale":2.0}"#);
        assert!(DelayModel::exponential(0.0).is_err());
        assert!(DelayModel::pos_normal(-1.0, 1.0).is_err());
    }
}
