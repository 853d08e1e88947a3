//! Adaptive Gauss–Kronrod (7/15) quadrature with absolute error control.

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

/// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Quadrature {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Quadrature {
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    }
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Quadrature {
    let q = kronrod(f, a, b);
    let roundoff = 50.0 * f64::EPSILON * q.value.abs();
    if q.error <= tol.max(roundoff) || depth >= MAX_DEPTH || (b - a).abs() <= 1e-15 * a.abs().max(1.0) {
        return q;
    }
    let mid = 0.5 * (a + b);
    let left = adapt(f, a, mid, 0.5 * tol, depth + 1);
    let right = adapt(f, mid, b, 0.5 * tol, depth + 1);
    Quadrature {
        value: left.value + right.value,
        error: left.error + right.error,
    }
}

/// Integrates `f` over `[a, b]` (signed: `b < a` flips the sign) to absolute
/// tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    if a == b {
        return Quadrature { value: 0.0, error: 0.0 };
    }
    if b < a {
        let q = adapt(&f, b, a, tol, 0);
        return Quadrature {
            value: -q.value,
            error: q.error,
        };
    }
    adapt(&f, a, b, tol, 0)
}

/// Like [`integrate`] but splits the range at the given interior points,
/// where the integrand may have kinks or jumps.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Quadrature {
    let (lo, hi, sign) = if b < a { (b, a, -1.0) } else { (a, b, 1.0) };
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > lo && x < hi).collect();
    if cuts.is_empty() {
        return integrate(f, a, b, tol);
    }
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    let pieces = cuts.len() + 1;
    let share = tol / pieces as f64;
    let mut total = Quadrature { value: 0.0, error: 0.0 };
    let mut left = lo;
    for right in cuts.into_iter().chain(std::iter::once(hi)) {
        let q = adapt(&f, left, right, share, 0);
        total.value += q.value;
        total.error += q.error;
        left = right;
    }
    total.value *= sign;
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| 3.0 * x * x + 1.0, 0.0, 2.0, 1e-12);
        assert_abs_diff_eq!(q.value, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn exponential_decay() {
        let q = integrate(|x: f64| (-x).exp(), 0.0, 20.0, 1e-12);
        assert_abs_diff_eq!(q.value, 1.0 - (-20.0f64).exp(), epsilon = 1e-11);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let q = integrate(|x: f64| x.cos(), 1.0, 0.0, 1e-12);
        assert_abs_diff_eq!(q.value, -(1.0f64).sin(), epsilon = 1e-12);
    }

    #[test]
    fn jump_with_break() {
        let f = |x: f64| if x < 0.1 { 3.0 } else { 1.0 };
        let q = integrate_with_breaks(f, 0.0, 1.0, &[0.1], 1e-12);
        assert_abs_diff_eq!(q.value, 1.2, epsilon = 1e-12);
    }

    #[test]
    fn jump_without_break_still_converges() {
        let f = |x: f64| if x < 0.1 { 3.0 } else { 1.0 };
        let q = integrate(f, 0.0, 1.0, 1e-9);
        assert_abs_diff_eq!(q.value, 1.2, epsilon = 1e-8);
    }
}
