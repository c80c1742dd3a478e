//! Slow, independent reference computations used to freeze expected values
//! in the test suites: adaptive Gauss–Kronrod quadrature, nested numerical
//! convolution and exhaustive grid maximization.
//!
//! Nothing in here is shared with the production code paths it checks.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel, returning (kronrod, |kronrod - gauss|).
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    err: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    if err <= tol || depth == 0 {
        return whole;
    }
    let mid = 0.5 * (a + b);
    let (left, el) = kronrod15(f, a, mid);
    let (right, er) = kronrod15(f, mid, b);
    if el + er <= tol {
        return left + right;
    }
    adapt(f, a, mid, left, el, 0.5 * tol, depth - 1)
        + adapt(f, mid, b, right, er, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss–Kronrod (7/15) integral of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, err) = kronrod15(&f, a, b);
    adapt(&f, a, b, whole, err, tol, 48)
}

/// Integral of `f` over `[a, ∞)` through the map `x = a + u / (1 - u)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    let g = |u: f64| {
        let one_minus = 1.0 - u;
        let x = a + u / one_minus;
        let value = f(x) / (one_minus * one_minus);
        if value.is_finite() {
            value
        } else {
            0.0
        }
    };
    // Split so the heavy part near the origin is resolved separately.
    integrate(g, 0.0, 0.5, tol * 0.5) + integrate(g, 0.5, 1.0, tol * 0.5)
}

/// Density of `X_1 + ... + X_k` at `t` for independent `X_i` with the given
/// densities (all supported on `[0, ∞)`), by nested quadrature.
pub fn convolve_at(densities: &[&dyn Fn(f64) -> f64], t: f64, tol: f64) -> f64 {
    match densities {
        [] => panic!("at least one density"),
        [only] => only(t),
        [first, rest @ ..] => integrate(|x| first(x) * convolve_at(rest, t - x, tol), 0.0, t, tol),
    }
}

/// Maximum of `f` over the regular grid `{lo + i·h}^dim` with `steps + 1`
/// points per axis.
pub fn grid_max<F: FnMut(&[f64]) -> f64>(
    dim: usize,
    lo: f64,
    hi: f64,
    steps: usize,
    mut f: F,
) -> f64 {
    let h = (hi - lo) / steps as f64;
    let mut index = vec![0usize; dim];
    let mut point = vec![lo; dim];
    let mut best = f64::NEG_INFINITY;
    loop {
        for (p, &i) in point.iter_mut().zip(&index) {
            *p = lo + i as f64 * h;
        }
        best = best.max(f(&point));
        let mut axis = 0;
        loop {
            if axis == dim {
                return best;
            }
            index[axis] += 1;
            if index[axis] <= steps {
                break;
            }
            index[axis] = 0;
            axis += 1;
        }
    }
}

/// Sample mean and unbiased sample variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 3.0, 1e-12);
        assert!((v - (81.0 / 4.0 - 9.0)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_tail() {
        let v = integrate_to_infinity(|x| (-x * x / 2.0).exp(), 0.0, 1e-12);
        assert!((v - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn exponential_convolution_is_gamma() {
        let e = |x: f64| if x >= 0.0 { (-x).exp() } else { 0.0 };
        let v = convolve_at(&[&e, &e], 1.5, 1e-12);
        assert!((v - 1.5 * (-1.5f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn grid_max_finds_corner() {
        let m = grid_max(2, 0.0, 1.0, 10, |p| p[0] + p[1]);
        assert!((m - 2.0).abs() < 1e-12);
    }
}
