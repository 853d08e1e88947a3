//! Memory kernels `h`, activation functions `Φ` and the scalar constants
//! derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::quad;

/// Non-negative, non-increasing memory function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MemoryKernel {
    /// `h(t) = exp(-t / scale)`.
    Exponential { scale: f64 },
    /// Piecewise-linear samples `(times[i], values[i])` with `times[0] = 0`;
    /// `h = 0` beyond the last time.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl MemoryKernel {
    pub fn exponential(scale: f64) -> Result<Self> {
        let k = MemoryKernel::Exponential { scale };
        k.validate()?;
        Ok(k)
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let k = MemoryKernel::Tabulated { times, values };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MemoryKernel::Exponential { scale } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(HawkesError::InvalidModel(format!(
                        "exponential kernel scale must be finite and > 0, got {scale}"
                    )));
                }
            }
            MemoryKernel::Tabulated { times, values } => {
                if times.len() < 2 || times.len() != values.len() {
                    return Err(HawkesError::InvalidModel(
                        "tabulated kernel needs at least two (t, h) samples of equal length".into(),
                    ));
                }
                if times[0] != 0.0 {
                    return Err(HawkesError::InvalidModel("tabulated kernel must start at t = 0".into()));
                }
                if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(HawkesError::InvalidModel(
                        "tabulated kernel times must be finite and strictly increasing".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(HawkesError::InvalidModel(
                        "tabulated kernel values must be finite and >= 0".into(),
                    ));
                }
                if values.windows(2).any(|w| w[1] > w[0]) {
                    return Err(HawkesError::InvalidModel(
                        "tabulated kernel must be non-increasing".into(),
                    ));
                }
                if self.alpha() <= 0.0 {
                    return Err(HawkesError::InvalidModel("tabulated kernel has zero mass".into()));
                }
            }
        }
        Ok(())
    }

    /// `h(t)`; `t = +∞` gives 0.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(HawkesError::Domain(format!("kernel evaluated at t = {t}")));
        }
        Ok(self.h(t))
    }

    /// Unchecked `h(t)` for `t >= 0`.
    #[inline]
    pub fn h(&self, t: f64) -> f64 {
        match self {
            MemoryKernel::Exponential { scale } => {
                if t == f64::INFINITY {
                    0.0
                } else {
                    (-t / scale).exp()
                }
            }
            MemoryKernel::Tabulated { times, values } => {
                let last = times.len() - 1;
                if t > times[last] {
                    return 0.0;
                }
                let i = times.partition_point(|&s| s <= t);
                if i == 0 {
                    return values[0];
                }
                if i > last {
                    return values[last];
                }
                let (t0, t1) = (times[i - 1], times[i]);
                let w = (t - t0) / (t1 - t0);
                values[i - 1] + w * (values[i] - values[i - 1])
            }
        }
    }

    /// `α = ∫_0^∞ h`.
    pub fn alpha(&self) -> f64 {
        match self {
            MemoryKernel::Exponential { scale } => *scale,
            MemoryKernel::Tabulated { times, values } => trapezoid(times, values, 0),
        }
    }

    /// Support end for tabulated kernels.
    pub fn cutoff(&self) -> Option<f64> {
        match self {
            MemoryKernel::Exponential { .. } => None,
            MemoryKernel::Tabulated { times, .. } => times.last().copied(),
        }
    }

    /// `H̄(x) = ∫_x^∞ h`.
    pub fn tail_mass(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match self {
            MemoryKernel::Exponential { scale } => {
                if x == f64::INFINITY {
                    0.0
                } else {
                    scale * (-x / scale).exp()
                }
            }
            MemoryKernel::Tabulated { times, values } => {
                let last = times.len() - 1;
                if x >= times[last] {
                    return 0.0;
                }
                let i = times.partition_point(|&s| s <= x);
                // x lies in [times[i-1], times[i])
                let hx = self.h(x);
                0.5 * (hx + values[i]) * (times[i] - x) + trapezoid(times, values, i)
            }
        }
    }

    /// `∫_0^∞ s h(s + a) ds`.
    pub fn tail_first_moment(&self, a: f64) -> f64 {
        let a = a.max(0.0);
        match self {
            MemoryKernel::Exponential { scale } => {
                if a == f64::INFINITY {
                    0.0
                } else {
                    scale * scale * (-a / scale).exp()
                }
            }
            MemoryKernel::Tabulated { times, .. } => {
                let end = *times.last().unwrap();
                if a >= end {
                    return 0.0;
                }
                // integrand is piecewise quadratic, so the rule is exact per piece
                quad::integrate_with_breaks(|u| (u - a) * self.h(u), a, end, times, 1e-13).value
            }
        }
    }
}

/// Trapezoid integral from `times[from]` to the last sample.
fn trapezoid(times: &[f64], values: &[f64], from: usize) -> f64 {
    let mut acc = 0.0;
    for i in from + 1..times.len() {
        acc += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
    }
    acc
}

/// Non-negative, non-decreasing activation function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Activation {
    /// `Φ(x) = ν + βx`.
    Affine { nu: f64, beta: f64 },
    /// `Φ(x) = (ν + βx)^γ`.
    Polynomial { nu: f64, beta: f64, gamma: f64 },
    /// Linear interpolation through `(x[i], y[i])`, `x[0] = 0`, continued
    /// past the last knot with `slope`.
    Tabulated { x: Vec<f64>, y: Vec<f64>, slope: f64 },
}

impl Activation {
    pub fn affine(nu: f64, beta: f64) -> Result<Self> {
        let a = Activation::Affine { nu, beta };
        a.validate()?;
        Ok(a)
    }

    pub fn polynomial(nu: f64, beta: f64, gamma: f64) -> Result<Self> {
        let a = Activation::Polynomial { nu, beta, gamma };
        a.validate()?;
        Ok(a)
    }

    pub fn tabulated(x: Vec<f64>, y: Vec<f64>, slope: f64) -> Result<Self> {
        let a = Activation::Tabulated { x, y, slope };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HawkesError::InvalidModel(m));
        match self {
            Activation::Affine { nu, beta } => {
                if !(nu.is_finite() && *nu > 0.0) {
                    return bad(format!("affine nu must be > 0, got {nu}"));
                }
                if !(beta.is_finite() && *beta >= 0.0) {
                    return bad(format!("affine beta must be >= 0, got {beta}"));
                }
            }
            Activation::Polynomial { nu, beta, gamma } => {
                if !(nu.is_finite() && *nu > 0.0) {
                    return bad(format!("polynomial nu must be > 0, got {nu}"));
                }
                if !(beta.is_finite() && *beta > 0.0) {
                    return bad(format!("polynomial beta must be > 0, got {beta}"));
                }
                if !(gamma.is_finite() && *gamma > 0.0) {
                    return bad(format!("polynomial gamma must be > 0, got {gamma}"));
                }
            }
            Activation::Tabulated { x, y, slope } => {
                if x.len() < 2 || x.len() != y.len() {
                    return bad("tabulated activation needs at least two knots of equal length".into());
                }
                if x[0] != 0.0 {
                    return bad("tabulated activation must start at x = 0".into());
                }
                if x.iter().any(|v| !v.is_finite()) || x.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("tabulated activation knots must be strictly increasing".into());
                }
                if y.iter().any(|v| !v.is_finite()) || y.windows(2).any(|w| w[1] < w[0]) {
                    return bad("tabulated activation must be non-decreasing".into());
                }
                if !(y[0] > 0.0) {
                    return bad("tabulated activation must be positive at 0".into());
                }
                if !(slope.is_finite() && *slope >= 0.0) {
                    return bad(format!("tabulated activation slope must be >= 0, got {slope}"));
                }
            }
        }
        Ok(())
    }

    /// `Φ(x)` for `x >= 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(HawkesError::Domain(format!("activation evaluated at x = {x}")));
        }
        Ok(self.phi(x))
    }

    /// Unchecked `Φ(x)`.
    #[inline]
    pub fn phi(&self, x: f64) -> f64 {
        match self {
            Activation::Affine { nu, beta } => nu + beta * x,
            Activation::Polynomial { nu, beta, gamma } => {
                let base = nu + beta * x;
                if *gamma == 1.0 {
                    base
                } else if *gamma == 2.0 {
                    base * base
                } else if *gamma == 0.5 {
                    base.sqrt()
                } else {
                    base.powf(*gamma)
                }
            }
            Activation::Tabulated { x: xs, y, slope } => {
                let last = xs.len() - 1;
                if x >= xs[last] {
                    return y[last] + slope * (x - xs[last]);
                }
                let i = xs.partition_point(|&s| s <= x);
                let (x0, x1) = (xs[i - 1], xs[i]);
                y[i - 1] + (x - x0) / (x1 - x0) * (y[i] - y[i - 1])
            }
        }
    }

    /// Every supported variant is non-decreasing once validated.
    pub fn is_non_decreasing(&self) -> bool {
        self.validate().is_ok()
    }

    /// `β = limsup Φ(x)/x`.
    pub fn beta_growth(&self) -> f64 {
        match self {
            Activation::Affine { beta, .. } => *beta,
            Activation::Polynomial { beta, gamma, .. } => {
                if *gamma < 1.0 {
                    0.0
                } else if *gamma == 1.0 {
                    *beta
                } else {
                    f64::INFINITY
                }
            }
            Activation::Tabulated { slope, .. } => *slope,
        }
    }

    /// Global Lipschitz constant, when one exists.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            Activation::Affine { beta, .. } => Some(*beta),
            Activation::Polynomial { nu, beta, gamma } => {
                if *gamma > 1.0 {
                    None
                } else {
                    // concave: steepest at 0
                    Some(gamma * beta * nu.powf(gamma - 1.0))
                }
            }
            Activation::Tabulated { x, y, slope } => {
                let seg = x
                    .windows(2)
                    .zip(y.windows(2))
                    .map(|(xw, yw)| (yw[1] - yw[0]) / (xw[1] - xw[0]))
                    .fold(*slope, f64::max);
                Some(seg)
            }
        }
    }

    /// Breakpoints of Φ (tabulated knots), empty otherwise.
    pub fn knots(&self) -> &[f64] {
        match self {
            Activation::Tabulated { x, .. } => x,
            _ => &[],
        }
    }

    /// `∫_a^b Φ(u)/u du` for `0 < a`, signed.
    pub fn phi_over_u_integral(&self, a: f64, b: f64, tol: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        if b < a {
            return -self.phi_over_u_integral(b, a, tol);
        }
        match self {
            Activation::Affine { nu, beta } => nu * (b / a).ln() + beta * (b - a),
            Activation::Polynomial { nu, beta, gamma } if is_small_integer(*gamma) => {
                let g = *gamma as i32;
                let mut acc = nu.powi(g) * (b / a).ln();
                let mut binom = 1.0;
                for j in 1..=g {
                    binom = binom * f64::from(g - j + 1) / f64::from(j);
                    acc += binom * nu.powi(g - j) * beta.powi(j) * (b.powi(j) - a.powi(j)) / f64::from(j);
                }
                acc
            }
            Activation::Tabulated { x, y, slope } => {
                // exact on each linear piece: (c + m u)/u integrates to c ln + m Δ
                let mut acc = 0.0;
                let mut lo = a;
                while lo < b {
                    let last = x.len() - 1;
                    let (hi, m, c) = if lo >= x[last] {
                        (b, *slope, y[last] - slope * x[last])
                    } else {
                        let i = x.partition_point(|&s| s <= lo);
                        let m = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
                        (x[i].min(b), m, y[i - 1] - m * x[i - 1])
                    };
                    acc += c * (hi / lo).ln() + m * (hi - lo);
                    lo = hi;
                }
                acc
            }
            _ => {
                // smooth in v = ln u
                let (la, lb) = (a.ln(), b.ln());
                quad::integrate(|v| self.phi(v.exp()), la, lb, tol).value
            }
        }
    }

    /// `∫_{u-1}^u Φ(s)/s ds`, for `u >= 2`.
    pub fn beta_e_window(&self, u: f64, tol: f64) -> f64 {
        self.phi_over_u_integral(u - 1.0, u, tol)
    }

    /// Grid surrogate for `β_e = limsup ∫_{u-1}^u Φ(s)/s ds`: the supremum of
    /// the window integral over the upper half of a geometric grid on
    /// `[2, u_max]`. Affine activations return `β` exactly.
    pub fn beta_e(&self, u_max: f64, tol: f64) -> Result<f64> {
        if !(u_max >= 2.0) {
            return Err(HawkesError::Domain(format!("beta_e needs u_max >= 2, got {u_max}")));
        }
        if let Activation::Affine { beta, .. } = self {
            return Ok(*beta);
        }
        const POINTS: usize = 64;
        let ratio = (u_max / 2.0).ln() / (POINTS - 1) as f64;
        let sup = (POINTS / 2..POINTS)
            .map(|i| 2.0 * (ratio * i as f64).exp())
            .map(|u| self.beta_e_window(u.min(u_max), tol))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(sup)
    }

    /// Affine `(ν₀, β₀)` with `Φ(x) <= ν₀ + β₀ x` for all `x >= 0`, where
    /// `β₀ = β(1 + margin)` (or `margin` for unbounded sublinear Φ, 0 for a
    /// bounded one). `None` when Φ grows superlinearly or `α β₀ >= 1`.
    pub fn affine_dominator(&self, alpha: f64, margin: f64) -> Option<(f64, f64)> {
        let beta = self.beta_growth();
        if !beta.is_finite() || !(margin > 0.0) {
            return None;
        }
        let bounded = match self {
            Activation::Affine { beta, .. } => *beta == 0.0,
            Activation::Tabulated { slope, .. } => *slope == 0.0,
            Activation::Polynomial { .. } => false,
        };
        let beta0 = if beta > 0.0 {
            beta * (1.0 + margin)
        } else if bounded {
            0.0
        } else {
            margin
        };
        if alpha * beta0 >= 1.0 {
            return None;
        }
        let excess = |x: f64| self.phi(x) - beta0 * x;
        let analytic = match self {
            Activation::Affine { nu, .. } => *nu,
            Activation::Polynomial { nu, beta, gamma } => {
                if *gamma == 1.0 {
                    *nu
                } else {
                    // concave excess: stationary point of (ν+βx)^γ - β₀x
                    let base = (beta0 / (gamma * beta)).powf(1.0 / (gamma - 1.0));
                    let xs = ((base - nu) / beta).max(0.0);
                    excess(xs)
                }
            }
            Activation::Tabulated { x, .. } => {
                // past the last knot the excess slope is slope - β₀ <= 0
                x.iter().map(|&k| excess(k)).fold(f64::NEG_INFINITY, f64::max)
            }
        };
        let grid = (0..=2000)
            .map(|i| 1e-6 * 10f64.powf(i as f64 * 0.006) - 1e-6)
            .map(excess)
            .fold(f64::NEG_INFINITY, f64::max);
        let nu0 = analytic.max(grid);
        Some((nu0 * (1.0 + 1e-12) + 1e-300, beta0))
    }
}

fn is_small_integer(g: f64) -> bool {
    g.fract() == 0.0 && (1.0..=16.0).contains(&g)
}

/// A kernel and an activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub kernel: MemoryKernel,
    pub activation: Activation,
}

impl ModelParams {
    pub fn new(kernel: MemoryKernel, activation: Activation) -> Result<Self> {
        let m = ModelParams { kernel, activation };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        self.activation.validate()
    }

    /// `α β`, the linear stability ratio.
    pub fn stability_ratio(&self) -> f64 {
        self.kernel.alpha() * self.activation.beta_growth()
    }
}
