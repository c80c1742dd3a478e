//! Densities of sums of independent exponentials (hypoexponential /
//! generalized Erlang laws).
//!
//! With rates `r_1..r_k` the density is
//! `g(t) = (∏ r_i) · t^(k-1) · I(r; t)` where
//! `I(r; t) = ∫_Δ exp(-t Σ w_i r_i) dw` over the unit simplex (volume
//! `1/(k-1)!`). `I` is a divided difference of the exponential, evaluated
//! here as the `(1, k)` entry of the exponential of a bidiagonal matrix via
//! uniformization. Every term of that series is nonnegative, so repeated or
//! clustered rates cost no precision.

use super::DelayError;

/// Stage rates of a hypoexponential law.
#[derive(Debug, Clone, PartialEq)]
pub struct RateList(Vec<f64>);

impl RateList {
    pub fn new(rates: Vec<f64>) -> Result<Self, DelayError> {
        if rates.is_empty() {
            return Err(DelayError::EmptyRates);
        }
        if let Some(&bad) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(DelayError::InvalidParameter(format!(
                "rate must be positive, got {bad}"
            )));
        }
        Ok(RateList(rates))
    }

    pub fn rates(&self) -> &[f64] {
        &self.0
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// `ln I(r; t)` for nonnegative offsets `δ_i = r_i - min r` already applied.
fn ln_shifted_simplex_exp(offsets: &[f64], t: f64) -> f64 {
    let k = offsets.len();
    if k == 1 {
        return 0.0;
    }
    let spread = offsets.iter().fold(0.0f64, |m, &d| m.max(d)) * t;
    if spread == 0.0 {
        return -ln_factorial(k - 1);
    }
    // exp(Z) = e^{-m} Σ_n m^n P^n / n! with Z = -t·diag(δ) + superdiagonal
    // ones and P = I + Z/m. Any m >= t·max δ keeps P nonnegative; m >= 1
    // also keeps its entries at most 1.
    let m = spread.max(1.0);
    let q = 1.0 / m;
    let diag: Vec<f64> = offsets.iter().map(|&d| 1.0 - t * d / m).collect();
    let mut row = vec![0.0; k];
    row[0] = 1.0;
    let ln_m = m.ln();
    let ln_fact_k1 = ln_factorial(k - 1);
    let mut ln_weight = -m;
    let mut ln_fact_p = 0.0;
    let mut sum = 0.0;
    let cap = (m + 60.0 * m.sqrt() + 200.0) as usize + 4 * k;
    for n in 0..=cap {
        if n + 1 >= k {
            sum += ln_weight.exp() * row[k - 1];
            // (P^j)_{1k} <= C(j, k-1) m^{1-k}, so term j is at most a
            // Poisson(m) weight at index p = j - k + 1 divided by (k-1)!.
            let p = (n + 1 - k) as f64;
            if p > 0.0 {
                ln_fact_p += p.ln();
            }
            let next = p + 2.0;
            if next > m {
                let ln_tail = -m + (p + 1.0) * ln_m
                    - ln_fact_p
                    - (p + 1.0).ln()
                    - ln_fact_k1
                    - (1.0 - m / next).ln();
                if ln_tail < (1e-17 * sum).ln() {
                    break;
                }
            }
        }
        for j in (1..k).rev() {
            row[j] = row[j] * diag[j] + row[j - 1] * q;
        }
        row[0] *= diag[0];
        ln_weight += ln_m - ((n + 1) as f64).ln();
    }
    sum.ln()
}

/// `ln ∫_Δ exp(-t Σ w_i r_i) dw` over the unit simplex.
pub fn ln_simplex_exp(rates: &[f64], t: f64) -> f64 {
    let min = rates.iter().fold(f64::INFINITY, |m, &r| m.min(r));
    let offsets: Vec<f64> = rates.iter().map(|&r| r - min).collect();
    -t * min + ln_shifted_simplex_exp(&offsets, t)
}

/// Log-density of the hypoexponential law at `t > 0`.
pub fn ln_hypoexp_density(rates: &RateList, t: f64) -> f64 {
    let r = rates.rates();
    let k = r.len();
    let ln_prod: f64 = r.iter().map(|x| x.ln()).sum();
    ln_prod + (k as f64 - 1.0) * t.ln() + ln_simplex_exp(r, t)
}

/// Density of the sum of independent exponentials with the given rates.
pub fn hypoexp_density(rates: &RateList, t: f64) -> Result<f64, DelayError> {
    if t.is_nan() || t < 0.0 {
        return Err(DelayError::NegativeArgument(t));
    }
    let r = rates.rates();
    if t == 0.0 {
        return Ok(if r.len() == 1 { r[0] } else { 0.0 });
    }
    Ok(ln_hypoexp_density(rates, t).exp())
}

/// Textbook alternating-sum form, valid only for pairwise distinct rates.
/// Loses precision quickly as rates approach each other; kept as a
/// reference for well-separated rates.
pub fn hypoexp_density_distinct(rates: &RateList, t: f64) -> f64 {
    let r = rates.rates();
    r.iter()
        .enumerate()
        .map(|(i, &ri)| {
            let coeff: f64 = r
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &rj)| rj / (rj - ri))
                .product();
            ri * (-ri * t).exp() * coeff
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use treelocate_oracles::{convolve_at, integrate_to_infinity};

    fn rl(r: &[f64]) -> RateList {
        RateList::new(r.to_vec()).unwrap()
    }

    #[test]
    fn rejects_empty_and_nonpositive() {
        assert_eq!(RateList::new(vec![]), Err(DelayError::EmptyRates));
        assert!(RateList::new(vec![1.0, 0.0]).is_err());
        assert!(hypoexp_density(&rl(&[1.0]), -1.0).is_err());
    }

    #[test]
    fn two_stage_closed_form() {
        let rates = rl(&[1.0, 2.0]);
        assert_eq!(hypoexp_density(&rates, 0.0).unwrap(), 0.0);
        for &t in &[0.1_f64, 0.5, 1.0, 3.0, 10.0] {
            let want: f64 = 2.0 * ((-t).exp() - (-2.0 * t).exp());
            let got = hypoexp_density(&rates, t).unwrap();
            assert!(
                (got - want).abs() < 1e-14 * want.max(1e-300) + 1e-16,
                "t={t}"
            );
        }
    }

    #[test]
    fn integrates_to_one() {
        let rates = rl(&[1.0, 2.0]);
        let total = integrate_to_infinity(|t| hypoexp_density(&rates, t).unwrap(), 0.0, 1e-12);
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn repeated_rates_give_erlang() {
        let got = hypoexp_density(&rl(&[1.0, 1.0]), 1.0).unwrap();
        assert!((got - (-1.0f64).exp()).abs() < 1e-15);
        // Erlang(5, 2) at t = 3.
        let want = 2f64.powi(5) * 3f64.powi(4) * (-6.0f64).exp() / 24.0;
        let got = hypoexp_density(&rl(&[2.0; 5]), 3.0).unwrap();
        assert!((got - want).abs() < 1e-13 * want);
    }

    #[test]
    fn matches_distinct_form_for_separated_rates() {
        let rates = rl(&[0.5, 1.3, 2.9, 4.0]);
        for &t in &[0.05, 0.7, 2.0, 6.0, 20.0] {
            let a = hypoexp_density(&rates, t).unwrap();
            let b = hypoexp_density_distinct(&rates, t);
            assert!((a - b).abs() < 1e-12 * a.max(1e-12), "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn near_equal_rates_are_continuous() {
        let base = hypoexp_density(&rl(&[1.0, 1.0, 1.0]), 2.0).unwrap();
        let near = hypoexp_density(&rl(&[1.0, 1.0 + 1e-9, 1.0 - 1e-9]), 2.0).unwrap();
        assert!((base - near).abs() < 1e-12);
        // Fifteen stages spread over a relative width of 1e-12.
        let mut rates: Vec<f64> = (0..15).map(|i| 1.0 + 1e-12 * f64::from(i)).collect();
        let clustered = hypoexp_density(&rl(&rates), 10.0).unwrap();
        rates.fill(1.0);
        let erlang = hypoexp_density(&rl(&rates), 10.0).unwrap();
        assert!(
            (clustered - erlang).abs() < 1e-9 * erlang,
            "{clustered} vs {erlang}"
        );
    }

    #[test]
    fn matches_numerical_convolution() {
        let e = |rate: f64| {
            move |x: f64| {
                if x >= 0.0 {
                    rate * (-rate * x).exp()
                } else {
                    0.0
                }
            }
        };
        let (f1, f2, f3) = (e(0.7), e(1.5), e(1.5));
        let rates = rl(&[0.7, 1.5, 1.5]);
        for &t in &[0.3, 1.0, 2.5, 5.0] {
            let want = convolve_at(&[&f1, &f2, &f3], t, 1e-12);
            let got = hypoexp_density(&rates, t).unwrap();
            assert!((got - want).abs() < 1e-6, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn large_spread_stays_finite() {
        let rates = rl(&[1.0, 1.0, 400.0, 900.0]);
        let v = ln_hypoexp_density(&rates, 30.0);
        assert!(v.is_finite());
        // Dominated by the slow stages: compare against the distinct form on
        // a nearby separated configuration.
        let sep = rl(&[1.0, 1.1, 400.0, 900.0]);
        let a = hypoexp_density(&sep, 3.0).unwrap();
        let b = hypoexp_density_distinct(&sep, 3.0);
        assert!((a - b).abs() < 1e-9 * a);
    }
}
