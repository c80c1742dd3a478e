//! Sine/cosine integrals and log-space normal CDF helpers.

use std::f64::consts::{FRAC_PI_2, PI};

use libm::erfc;
use num_complex::Complex64;

use super::DelayError;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 4.0;

/// Power series for `(Ci(x), Si(x))`, `0 < x <= 4`.
fn cisi_series(x: f64) -> (f64, f64) {
    let mut si = 0.0;
    let mut ci_tail = 0.0;
    let mut power = 1.0; // x^k / k!
    let mut k = 1u32;
    loop {
        power *= x / f64::from(k);
        // Signs follow the pattern +, -, -, +, +, -, ... for k = 1, 2, 3, ...
        let sign = if k.div_ceil(2) % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * power / f64::from(k);
        if k % 2 == 1 {
            si += term;
        } else {
            ci_tail -= term;
        }
        if power / f64::from(k) < 1e-18 * (si.abs() + ci_tail.abs()) {
            break;
        }
        k += 1;
    }
    (EULER_GAMMA + x.ln() + ci_tail, si)
}

/// Continued fraction for `E1(ix) = -Ci(x) + i (Si(x) - π/2)`, `x > 4`.
/// Returns `(Ci(x), Si(x) - π/2)`.
fn cisi_continued_fraction(x: f64) -> (f64, f64) {
    const TINY: f64 = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..1000 {
        let a = -f64::from((i - 1) * (i - 1));
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    let e1 = Complex64::new(x.cos(), -x.sin()) * h;
    (-e1.re, e1.im)
}

/// Sine integral `Si(x) = ∫_0^x sin(u)/u du` (odd in `x`).
pub fn sine_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x == 0.0 {
        0.0
    } else if x <= SERIES_LIMIT {
        cisi_series(x).1
    } else {
        FRAC_PI_2 + cisi_continued_fraction(x).1
    }
}

/// Cosine integral `Ci(x) = γ + ln x + ∫_0^x (cos u - 1)/u du`, `x > 0`.
pub fn cosine_integral(x: f64) -> Result<f64, DelayError> {
    if x.is_nan() || x <= 0.0 {
        return Err(DelayError::NonpositiveArgument(x));
    }
    Ok(if x <= SERIES_LIMIT {
        cisi_series(x).0
    } else {
        cisi_continued_fraction(x).0
    })
}

/// Auxiliary function `f(x) = Ci(x) sin x - (Si(x) - π/2) cos x`, `x >= 0`.
pub(crate) fn auxiliary_f(x: f64) -> f64 {
    if x == 0.0 {
        return FRAC_PI_2;
    }
    let (ci, si_shift) = if x <= SERIES_LIMIT {
        let (ci, si) = cisi_series(x);
        (ci, si - FRAC_PI_2)
    } else {
        cisi_continued_fraction(x)
    };
    ci * x.sin() - si_shift * x.cos()
}

/// `ln Φ(x)` for the standard normal CDF, accurate far into the lower tail.
pub fn ln_normal_cdf(x: f64) -> f64 {
    if x >= -5.0 {
        (0.5 * erfc(-x / std::f64::consts::SQRT_2)).ln()
    } else {
        -0.5 * x * x - 0.5 * (2.0 * PI).ln() + ln_mills_ratio(-x)
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `ln R(z)` for the Mills ratio `R(z) = (1 - Φ(z)) / φ(z)`, `z >= 5`,
/// by backward evaluation of its continued fraction.
pub(crate) fn ln_mills_ratio(z: f64) -> f64 {
    let mut tail = z;
    for k in (1..=120).rev() {
        tail = z + f64::from(k) / tail;
    }
    -tail.ln()
}
