//! Maximal coupling of two point-process clocks and the coupling estimate
//! between a chain started from a history `z` and one started empty.
//!
//! For rates `f`, `g` draw independent clocks `τ1` for `(f-g)^+`, `τ2` for
//! `(g-f)^+` and `τ3` for `f ∧ g`. Then `T_f = τ1 ∧ τ3` has rate `f`,
//! `T_g = τ2 ∧ τ3` has rate `g`, and `P(T_f != T_g) <= ∫|f-g|`.

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::history::InterArrivalState;
use crate::model::ModelParams;
use crate::quad;
use crate::rng::StreamRng;
use crate::roots::{first_passage, Compensator, Passage};
use crate::simulator::{Numerics, StateIntensity};

/// Residual mismatch mass below which two chains count as coupled forever.
pub const COUPLED_MASS: f64 = 1e-12;

/// A non-negative rate on `[0, ∞)`.
pub trait RateFn {
    fn rate(&self, t: f64) -> f64;

    /// Points where the rate may jump or kink.
    fn breaks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl RateFn for StateIntensity<'_> {
    fn rate(&self, t: f64) -> f64 {
        Compensator::rate(self, t)
    }

    fn breaks(&self) -> Vec<f64> {
        StateIntensity::breaks(self).to_vec()
    }
}

impl<R: RateFn + ?Sized> RateFn for &R {
    fn rate(&self, t: f64) -> f64 {
        (**self).rate(t)
    }

    fn breaks(&self) -> Vec<f64> {
        (**self).breaks()
    }
}

/// Right-continuous step function; `values[i]` holds on `[knots[i], knots[i+1])`
/// and the last value holds to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstant {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.is_empty() || knots.len() != values.len() {
            return Err(HawkesError::Domain(
                "step function needs matching non-empty knots and values".into(),
            ));
        }
        if knots[0] != 0.0 || knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(HawkesError::Domain("step knots must start at 0 and increase".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(HawkesError::Domain("step values must be finite and >= 0".into()));
        }
        Ok(Self { knots, values })
    }

    /// Exact `∫_0^t`.
    pub fn integral(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.knots.len() {
            let lo = self.knots[i];
            if lo >= t {
                break;
            }
            let hi = self.knots.get(i + 1).copied().unwrap_or(f64::INFINITY).min(t);
            acc += self.values[i] * (hi - lo);
        }
        acc
    }
}

impl RateFn for PiecewiseConstant {
    fn rate(&self, t: f64) -> f64 {
        let i = self.knots.partition_point(|&k| k <= t);
        self.values[i.saturating_sub(1)]
    }

    fn breaks(&self) -> Vec<f64> {
        self.knots[1..].to_vec()
    }
}

/// `(f - g)^+`.
pub struct Excess<F, G>(pub F, pub G);

/// `f ∧ g`.
pub struct Common<F, G>(pub F, pub G);

impl<F: RateFn, G: RateFn> RateFn for Excess<F, G> {
    fn rate(&self, t: f64) -> f64 {
        (self.0.rate(t) - self.1.rate(t)).max(0.0)
    }

    fn breaks(&self) -> Vec<f64> {
        merged(&self.0, &self.1)
    }
}

impl<F: RateFn, G: RateFn> RateFn for Common<F, G> {
    fn rate(&self, t: f64) -> f64 {
        self.0.rate(t).min(self.1.rate(t))
    }

    fn breaks(&self) -> Vec<f64> {
        merged(&self.0, &self.1)
    }
}

fn merged(a: &impl RateFn, b: &impl RateFn) -> Vec<f64> {
    let mut v = a.breaks();
    v.extend(b.breaks());
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// A rate with its break points cached, usable by the root finder.
struct Clock<R> {
    rate: R,
    breaks: Vec<f64>,
}

impl<R: RateFn> Clock<R> {
    fn new(rate: R) -> Self {
        let breaks = rate.breaks();
        Self { rate, breaks }
    }

    fn fire(&self, e: f64, tol: f64, cap: f64) -> Result<f64> {
        Ok(match first_passage(self, e, tol, cap)? {
            Passage::Hit(t) => t,
            Passage::Beyond { .. } => f64::INFINITY,
        })
    }
}

impl<R: RateFn> Compensator for Clock<R> {
    fn rate(&self, t: f64) -> f64 {
        self.rate.rate(t)
    }

    fn increment(&self, a: f64, b: f64, tol: f64) -> f64 {
        quad::integrate_with_breaks(|s| self.rate.rate(s), a, b, &self.breaks, tol).value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockPair {
    pub tau_f: f64,
    pub tau_g: f64,
    pub coupled: bool,
}

/// Draws coupled first-event times for rates `f` and `g`. Times past `cap`
/// are reported as infinite. Always consumes three draws.
pub fn couple_clocks<F: RateFn, G: RateFn>(f: F, g: G, rng: &mut StreamRng, tol: f64, cap: f64) -> Result<ClockPair> {
    let e1 = rng.exp1();
    let e2 = rng.exp1();
    let e3 = rng.exp1();
    let tau3 = Clock::new(Common(&f, &g)).fire(e3, tol, cap)?;
    let inner = tau3.min(cap);
    let tau1 = Clock::new(Excess(&f, &g)).fire(e1, tol, inner)?;
    let tau2 = Clock::new(Excess(&g, &f)).fire(e2, tol, inner)?;
    let tau_f = tau1.min(tau3);
    let tau_g = tau2.min(tau3);
    let tau_f = if tau_f > cap { f64::INFINITY } else { tau_f };
    let tau_g = if tau_g > cap { f64::INFINITY } else { tau_g };
    Ok(ClockPair {
        tau_f,
        tau_g,
        coupled: tau_f == tau_g,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingOptions {
    pub numerics: Numerics,
    /// Random walks used to fit `E N(0, x) <= D1 + D2 x`.
    pub walks: usize,
    pub margin: f64,
    /// Steps after which an undecided trial counts as failed.
    pub max_steps: usize,
}

impl Default for CouplingOptions {
    fn default() -> Self {
        Self {
            numerics: Numerics::default(),
            walks: 2000,
            margin: 0.05,
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub n_trials: usize,
    pub n_coupled: usize,
    /// `L (D1 Σ H̄(o_k) + D2 Σ H̄₁(o_k))` over the points of `z` before 0.
    pub bound_value: f64,
    /// Fraction of trials that never coupled.
    pub empirical_rate: f64,
    pub std_error: f64,
    pub d1: f64,
    pub d2: f64,
    /// Smallest shift of `z` into the past that brings the bound to 1/2.
    pub k0: f64,
    pub lipschitz: f64,
    pub nu0: f64,
    pub beta0: f64,
}

/// Fits `D1`, `D2` with `E #{n >= 0 : S_n^+ <= x} <= D1 + D2 x` on a grid,
/// where `S_n = (1/ν₀) Σ_{i<=n} (E_i - αβ₀)`.
pub fn renewal_constants(nu0: f64, beta0: f64, alpha: f64, walks: usize, rng: &mut StreamRng) -> Result<(f64, f64)> {
    let ab = alpha * beta0;
    if !(ab < 1.0) || walks == 0 {
        return Err(HawkesError::Domain(format!(
            "renewal fit needs αβ₀ < 1 and walks > 0 (αβ₀ = {ab})"
        )));
    }
    let drift = (1.0 - ab) / nu0;
    let x_max = 50.0 * drift;
    let stop = x_max + 40.0 * (1.0 + ab) / nu0;
    let grid: Vec<f64> = (0..=25).map(|i| x_max * i as f64 / 25.0).collect();
    let mut counts = vec![0.0; grid.len()];
    for _ in 0..walks {
        let mut s = 0.0_f64;
        loop {
            let sp = s.max(0.0);
            for (c, x) in counts.iter_mut().zip(&grid) {
                if sp <= *x {
                    *c += 1.0;
                }
            }
            if s > stop {
                break;
            }
            s += (rng.exp1() - ab) / nu0;
        }
    }
    let mean: Vec<f64> = counts.iter().map(|c| c / walks as f64).collect();
    let gx = grid.iter().sum::<f64>() / grid.len() as f64;
    let gy = mean.iter().sum::<f64>() / mean.len() as f64;
    let sxy: f64 = grid.iter().zip(&mean).map(|(x, y)| (x - gx) * (y - gy)).sum();
    let sxx: f64 = grid.iter().map(|x| (x - gx) * (x - gx)).sum();
    let d2 = sxy / sxx;
    let d1 = grid
        .iter()
        .zip(&mean)
        .map(|(x, y)| y - d2 * x)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((d1, d2))
}

fn bound_at(model: &ModelParams, offsets: &[f64], shift: f64, l: f64, d1: f64, d2: f64) -> f64 {
    let k = &model.kernel;
    l * offsets
        .iter()
        .map(|o| d1 * k.tail_mass(o + shift) + d2 * k.tail_first_moment(o + shift))
        .sum::<f64>()
}

/// Monte Carlo estimate of the probability that the chains from `z` and from
/// the empty history never merge, next to the analytic bound.
pub fn coupling_bound_estimate(
    z: &InterArrivalState,
    model: &ModelParams,
    mc_trials: usize,
    rng: &mut StreamRng,
    opts: &CouplingOptions,
) -> Result<CouplingReport> {
    if mc_trials == 0 {
        return Err(HawkesError::Domain("need at least one trial".into()));
    }
    let act = &model.activation;
    let l = act
        .lipschitz()
        .ok_or_else(|| HawkesError::Unsupported("coupling bound needs a Lipschitz activation".into()))?;
    let alpha = model.kernel.alpha();
    let (nu0, beta0) = act
        .affine_dominator(alpha, opts.margin)
        .ok_or_else(|| HawkesError::Unsupported("activation has no affine dominator with αβ₀ < 1".into()))?;
    let (d1, d2) = renewal_constants(nu0, beta0, alpha, opts.walks, rng)?;
    let offsets: Vec<f64> = z.offsets().collect();
    let bound_value = bound_at(model, &offsets, 0.0, l, d1, d2);
    let k0 = if bound_value <= 0.5 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        while bound_at(model, &offsets, hi, l, d1, d2) > 0.5 && hi < 1e9 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if bound_at(model, &offsets, mid, l, d1, d2) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };

    let num = &opts.numerics;
    let mut n_coupled = 0;
    for _ in 0..mc_trials {
        if coupling_trial(z, &offsets, model, l, rng, num, opts.max_steps)? {
            n_coupled += 1;
        }
    }
    let p = (mc_trials - n_coupled) as f64 / mc_trials as f64;
    Ok(CouplingReport {
        n_trials: mc_trials,
        n_coupled,
        bound_value,
        empirical_rate: p,
        std_error: (p * (1.0 - p) / mc_trials as f64).sqrt(),
        d1,
        d2,
        k0,
        lipschitz: l,
        nu0,
        beta0,
    })
}

fn coupling_trial(
    z: &InterArrivalState,
    offsets: &[f64],
    model: &ModelParams,
    l: f64,
    rng: &mut StreamRng,
    num: &Numerics,
    max_steps: usize,
) -> Result<bool> {
    let mut xa = z.clone();
    let mut xb = InterArrivalState::empty();
    let mut elapsed = 0.0;
    for _ in 0..max_steps {
        let left: f64 = l * offsets.iter().map(|o| model.kernel.tail_mass(elapsed + o)).sum::<f64>();
        if left < COUPLED_MASS {
            return Ok(true);
        }
        let fa = StateIntensity::new(&xa, model, num.eps_tail)?;
        let fb = StateIntensity::new(&xb, model, num.eps_tail)?;
        let pair = couple_clocks(&fa, &fb, rng, num.tol, num.time_cap)?;
        if !pair.coupled {
            return Ok(false);
        }
        if !pair.tau_f.is_finite() {
            return Ok(true);
        }
        elapsed += pair.tau_f;
        xa.prepend_in_place(pair.tau_f)?;
        xb.prepend_in_place(pair.tau_f)?;
    }
    Ok(false)
}
