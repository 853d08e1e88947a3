//! Event-by-event simulation by inverting the cumulative intensity.
//!
//! From a state `x`, the next gap is the time `t` at which
//! `Λ(t) = ∫_0^t Φ(S(s, x)) ds` reaches a fresh unit exponential `E`; the
//! new state is `(t, x)`. Thinning is provided as an independent check.

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::history::{excitation_sum, InterArrivalState};
use crate::model::{MemoryKernel, ModelParams};
use crate::quad;
use crate::rng::StreamRng;
use crate::roots::{invert, Compensator};

/// Tolerances shared by the inversion routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    /// Absolute tolerance on the compensator equation.
    pub tol: f64,
    /// Truncation level for excitation sums.
    pub eps_tail: f64,
    /// Largest gap searched before giving up.
    pub time_cap: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            eps_tail: 1e-14,
            time_cap: 1e6,
        }
    }
}

impl Numerics {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub max_events: usize,
    pub horizon: Option<f64>,
    pub inversion_tol: f64,
    /// A gap below this flags a suspected blow-up and ends the run.
    pub min_gap: f64,
    pub eps_tail: f64,
    pub time_cap: f64,
}

impl SimConfig {
    pub fn new(seed: u64, max_events: usize) -> Self {
        let n = Numerics::default();
        Self {
            seed,
            max_events,
            horizon: None,
            inversion_tol: n.tol,
            min_gap: 1e-12,
            eps_tail: n.eps_tail,
            time_cap: n.time_cap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("inversion_tol", self.inversion_tol),
            ("min_gap", self.min_gap),
            ("eps_tail", self.eps_tail),
            ("time_cap", self.time_cap),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(HawkesError::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0) {
                return Err(HawkesError::Domain(format!("horizon must be > 0, got {h}")));
            }
        }
        Ok(())
    }

    pub fn numerics(&self) -> Numerics {
        Numerics {
            tol: self.inversion_tol,
            eps_tail: self.eps_tail,
            time_cap: self.time_cap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathStatus {
    Completed,
    HorizonReached,
    BlowUpSuspected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointPath {
    pub gaps: Vec<f64>,
    pub times: Vec<f64>,
    pub e_used: Vec<f64>,
    pub status: PathStatus,
}

impl PointPath {
    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) -> f64 {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
        t
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

enum Profile {
    /// `S(s) = c e^{-s/scale}`.
    Exponential { scale: f64, c: f64 },
    /// `S(s) = Σ h(s + o)` over the offsets still inside the support.
    Tabulated { offsets: Vec<f64>, breaks: Vec<f64> },
}

/// The intensity `s ↦ Φ(S(s, x))` after the point at 0, seen from state `x`.
pub struct StateIntensity<'a> {
    model: &'a ModelParams,
    profile: Profile,
}

impl<'a> StateIntensity<'a> {
    pub fn new(x: &InterArrivalState, model: &'a ModelParams, eps_tail: f64) -> Result<Self> {
        let profile = match &model.kernel {
            MemoryKernel::Exponential { scale } => {
                // every term shifts by the same factor e^{-s/scale}
                let (c, _) = excitation_sum(x, 0.0, &model.kernel, eps_tail)?;
                Profile::Exponential { scale: *scale, c }
            }
            MemoryKernel::Tabulated { times, .. } => {
                excitation_sum(x, 0.0, &model.kernel, eps_tail)?;
                let cut = model.kernel.cutoff().unwrap();
                let offsets: Vec<f64> = std::iter::once(0.0)
                    .chain(x.offsets())
                    .take_while(|&o| o <= cut)
                    .collect();
                // every knot of h, seen from every point, is a kink of S
                let breaks = offsets
                    .iter()
                    .flat_map(|o| times[1..].iter().map(move |t| t - o))
                    .filter(|&b| b > 0.0)
                    .collect();
                Profile::Tabulated { offsets, breaks }
            }
        };
        Ok(Self { model, profile })
    }

    /// `S(s, x)`.
    #[inline]
    pub fn excitation(&self, s: f64) -> f64 {
        match &self.profile {
            Profile::Exponential { scale, c } => c * (-s / scale).exp(),
            Profile::Tabulated { offsets, .. } => offsets.iter().map(|o| self.model.kernel.h(s + o)).sum(),
        }
    }

    pub fn breaks(&self) -> &[f64] {
        match &self.profile {
            Profile::Exponential { .. } => &[],
            Profile::Tabulated { breaks, .. } => breaks,
        }
    }
}

impl Compensator for StateIntensity<'_> {
    #[inline]
    fn rate(&self, t: f64) -> f64 {
        self.model.activation.phi(self.excitation(t))
    }

    fn increment(&self, a: f64, b: f64, tol: f64) -> f64 {
        quad::integrate_with_breaks(|s| self.rate(s), a, b, self.breaks(), tol).value
    }
}

/// `Λ(t) = ∫_0^t Φ(S(s, x)) ds` to absolute accuracy `tol`.
pub fn cumulative_intensity(x: &InterArrivalState, t: f64, model: &ModelParams, tol: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(HawkesError::Domain(format!("cumulative intensity at t = {t}")));
    }
    let lam = StateIntensity::new(x, model, Numerics::default().eps_tail.min(tol * 1e-3))?;
    Ok(lam.increment(0.0, t, tol))
}

/// The gap `t` with `Λ(t) = e`.
pub fn next_gap_inverse(x: &InterArrivalState, e: f64, model: &ModelParams, num: &Numerics) -> Result<f64> {
    if !(e > 0.0) {
        return Err(HawkesError::Domain(format!("exponential draw must be > 0, got {e}")));
    }
    let lam = StateIntensity::new(x, model, num.eps_tail)?;
    invert(&lam, e, num.tol, num.time_cap)
}

/// One transition of the chain with an explicit exponential draw.
pub fn kernel_step_with(
    x: &InterArrivalState,
    e: f64,
    model: &ModelParams,
    num: &Numerics,
) -> Result<InterArrivalState> {
    x.prepend_gap(next_gap_inverse(x, e, model, num)?)
}

/// One transition of the chain, drawing `E ~ Exp(1)` from `rng`.
pub fn kernel_step(
    x: &InterArrivalState,
    rng: &mut StreamRng,
    model: &ModelParams,
    num: &Numerics,
) -> Result<InterArrivalState> {
    let e = rng.exp1();
    kernel_step_with(x, e, model, num)
}

/// Runs the chain from `x0` with the stream selected by `cfg.seed`.
pub fn simulate(x0: &InterArrivalState, model: &ModelParams, cfg: &SimConfig) -> Result<PointPath> {
    let mut rng = StreamRng::new(cfg.seed);
    simulate_with_rng(x0, model, cfg, &mut rng)
}

pub fn simulate_with_rng(
    x0: &InterArrivalState,
    model: &ModelParams,
    cfg: &SimConfig,
    rng: &mut StreamRng,
) -> Result<PointPath> {
    cfg.validate()?;
    let num = cfg.numerics();
    let mut state = x0.clone();
    let mut path = PointPath {
        gaps: Vec::with_capacity(cfg.max_events.min(1 << 20)),
        times: Vec::with_capacity(cfg.max_events.min(1 << 20)),
        e_used: Vec::with_capacity(cfg.max_events.min(1 << 20)),
        status: PathStatus::Completed,
    };
    let mut clock = KahanSum::default();
    for _ in 0..cfg.max_events {
        let e = rng.exp1();
        let gap = next_gap_inverse(&state, e, model, &num)?;
        if !(gap > 0.0) {
            path.status = PathStatus::BlowUpSuspected;
            break;
        }
        let mut next_clock = clock;
        let t = next_clock.add(gap);
        if cfg.horizon.is_some_and(|h| t > h) {
            path.status = PathStatus::HorizonReached;
            break;
        }
        clock = next_clock;
        path.gaps.push(gap);
        path.times.push(t);
        path.e_used.push(e);
        if gap < cfg.min_gap {
            path.status = PathStatus::BlowUpSuspected;
            break;
        }
        state.prepend_in_place(gap)?;
    }
    Ok(path)
}

/// Recomputes `Λ` over every gap of `path` and checks it against the
/// recorded draws.
pub fn compensator_increments(
    path: &PointPath,
    x0: &InterArrivalState,
    model: &ModelParams,
    tol: f64,
) -> Result<Vec<f64>> {
    let mut state = x0.clone();
    let mut out = Vec::with_capacity(path.len());
    for (i, (&gap, &e)) in path.gaps.iter().zip(&path.e_used).enumerate() {
        let v = cumulative_intensity(&state, gap, model, tol)?;
        if (v - e).abs() > 10.0 * tol {
            return Err(HawkesError::Integrity {
                index: i,
                recomputed: v,
                recorded: e,
            });
        }
        out.push(v);
        state.prepend_in_place(gap)?;
    }
    Ok(out)
}

/// Ogata thinning from state `x`. Valid because `s ↦ Φ(S(s, x))` is
/// non-increasing between events.
pub fn next_gap_thinning(
    x: &InterArrivalState,
    rng: &mut StreamRng,
    model: &ModelParams,
    num: &Numerics,
) -> Result<f64> {
    if !model.activation.is_non_decreasing() {
        return Err(HawkesError::Unsupported(
            "thinning needs a non-decreasing activation".into(),
        ));
    }
    let lam = StateIntensity::new(x, model, num.eps_tail)?;
    let mut t = 0.0;
    loop {
        let bound = lam.rate(t);
        if !(bound > 0.0) {
            return Err(HawkesError::Domain("intensity vanished during thinning".into()));
        }
        t += rng.exp(bound);
        if t > num.time_cap {
            return Err(HawkesError::UnboundedSearch {
                cap: num.time_cap,
                reached: f64::NAN,
                target: f64::NAN,
            });
        }
        if rng.uniform() * bound <= lam.rate(t) {
            return Ok(t);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomWalkCheck {
    pub holds: bool,
    pub violations: usize,
    /// Smallest value of right side minus left side over the path.
    pub min_slack: f64,
    pub nu0: f64,
    pub beta0: f64,
}

/// Checks, at every `n`, that
/// `Σ_{k<=n} (E_k - αβ₀) <= ν₀ T_n - β₀ Σ_{k<=n} H̄(T_n - T_{k-1})`
/// along an empty-start path, for the affine dominator `ν₀ + β₀x` of Φ.
/// A numerical slack of `10 tol n` is allowed at step `n`.
pub fn random_walk_bound(path: &PointPath, model: &ModelParams, margin: f64, tol: f64) -> Result<RandomWalkCheck> {
    let alpha = model.kernel.alpha();
    let (nu0, beta0) = model
        .activation
        .affine_dominator(alpha, margin)
        .ok_or_else(|| HawkesError::Unsupported("activation has no affine dominator with αβ₀ < 1".into()))?;
    let mut lhs = KahanSum::default();
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    // points T_0 = 0, T_1, ... and the tail-mass sum over them
    let mut decay = 0.0; // Σ_{i<n} e^{-(T_n - T_i)/scale} for the exponential kernel
    let mut window: std::collections::VecDeque<f64> = Default::default();
    let mut previous = 0.0;
    for (n, (&gap, &e)) in path.gaps.iter().zip(&path.e_used).enumerate() {
        let tn = path.times[n];
        lhs.add(e - alpha * beta0);
        let hsum = match &model.kernel {
            MemoryKernel::Exponential { scale } => {
                decay = (decay + 1.0) * (-gap / scale).exp();
                scale * decay
            }
            MemoryKernel::Tabulated { .. } => {
                let cut = model.kernel.cutoff().unwrap();
                window.push_back(previous);
                while window.front().is_some_and(|&ti| tn - ti >= cut) {
                    window.pop_front();
                }
                window.iter().map(|&ti| model.kernel.tail_mass(tn - ti)).sum()
            }
        };
        previous = tn;
        let rhs = nu0 * tn - beta0 * hsum;
        let slack = rhs - lhs.value() + 10.0 * tol * (n + 1) as f64;
        min_slack = min_slack.min(rhs - lhs.value());
        if slack < 0.0 {
            violations += 1;
        }
    }
    Ok(RandomWalkCheck {
        holds: violations == 0,
        violations,
        min_slack,
        nu0,
        beta0,
    })
}

pub fn random_walk_bound_check(path: &PointPath, model: &ModelParams, margin: f64) -> Result<bool> {
    Ok(random_walk_bound(path, model, margin, Numerics::default().tol)?.holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Activation, MemoryKernel};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const OMEGA: f64 = 0.567_143_290_409_783_8;

    fn model(act: Activation) -> ModelParams {
        ModelParams::new(MemoryKernel::exponential(1.0).unwrap(), act).unwrap()
    }

    fn poisson2() -> ModelParams {
        model(Activation::affine(2.0, 0.0).unwrap())
    }

    fn affine11() -> ModelParams {
        model(Activation::affine(1.0, 1.0).unwrap())
    }

    fn st(g: &[f64]) -> InterArrivalState {
        InterArrivalState::from_gaps(g.to_vec(), true).unwrap()
    }

    #[test]
    fn cumulative_examples() {
        let tol = 1e-10;
        let v = cumulative_intensity(&st(&[0.3, 1.0]), 3.0, &poisson2(), tol).unwrap();
        assert_abs_diff_eq!(v, 6.0, epsilon = tol);
        let v = cumulative_intensity(&InterArrivalState::empty(), 1.0, &affine11(), tol).unwrap();
        assert_abs_diff_eq!(v, 2.0 - (-1.0f64).exp(), epsilon = tol);
        assert_eq!(cumulative_intensity(&st(&[0.2]), 0.0, &affine11(), tol).unwrap(), 0.0);
    }

    #[test]
    fn inversion_examples() {
        let num = Numerics::default();
        let g = next_gap_inverse(&st(&[1.0]), 1.0, &poisson2(), &num).unwrap();
        assert_abs_diff_eq!(g, 0.5, epsilon = 1e-10);
        let g = next_gap_inverse(&InterArrivalState::empty(), 1.0, &affine11(), &num).unwrap();
        assert_abs_diff_eq!(g, OMEGA, epsilon = 1e-10);
        let g = next_gap_inverse(&InterArrivalState::empty(), 1e-9, &affine11(), &num).unwrap();
        assert!(g > 0.0 && g < 1e-9);
    }

    #[test]
    fn step_examples() {
        let num = Numerics::default();
        let x = kernel_step_with(&InterArrivalState::empty(), 1.0, &poisson2(), &num).unwrap();
        assert_eq!(x.len(), 1);
        assert_abs_diff_eq!(x.coord(1), 0.5, epsilon = 1e-10);
        assert!(x.tail_infinite());
        let x = kernel_step_with(&InterArrivalState::empty(), 1.0, &affine11(), &num).unwrap();
        assert_abs_diff_eq!(x.coord(1), OMEGA, epsilon = 1e-10);
    }

    #[test]
    fn steps_match_simulate() {
        let m = model(Activation::polynomial(1.0, 1.0, 0.5).unwrap());
        let num = Numerics::default();
        let mut rng = StreamRng::new(5);
        let x1 = kernel_step(&InterArrivalState::empty(), &mut rng, &m, &num).unwrap();
        let x2 = kernel_step(&x1, &mut rng, &m, &num).unwrap();
        let path = simulate(&InterArrivalState::empty(), &m, &SimConfig::new(5, 2)).unwrap();
        assert_eq!(path.gaps, vec![x2.coord(2), x2.coord(1)]);
    }

    #[test]
    fn poisson_mean_gap() {
        let path = simulate(&InterArrivalState::empty(), &poisson2(), &SimConfig::new(42, 100_000)).unwrap();
        assert_eq!(path.status, PathStatus::Completed);
        let mean = path.gaps.iter().sum::<f64>() / path.len() as f64;
        assert!((mean - 0.5).abs() < 3.0 * 0.5 / (1e5f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn times_are_cumulative_sums() {
        let path = simulate(&InterArrivalState::empty(), &affine11(), &SimConfig::new(1, 2000)).unwrap();
        let mut acc = 0.0;
        for (g, t) in path.gaps.iter().zip(&path.times) {
            acc += g;
            assert!((acc - t).abs() <= 1e-12 * t);
        }
        assert!(path.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(path.e_used.len(), path.gaps.len());
    }

    #[test]
    fn horizon_reached_with_stable_rate() {
        let m = model(Activation::affine(1.0, 0.5).unwrap());
        let mut total_events = 0usize;
        let mut total_time = 0.0;
        for seed in 0..10 {
            let mut cfg = SimConfig::new(seed, 1_000_000);
            cfg.horizon = Some(1000.0);
            let path = simulate(&InterArrivalState::empty(), &m, &cfg).unwrap();
            assert_eq!(path.status, PathStatus::HorizonReached);
            assert!(*path.times.last().unwrap() <= 1000.0);
            total_events += path.len();
            total_time += 1000.0;
        }
        let rate = total_events as f64 / total_time;
        assert!((rate - 2.0).abs() < 0.1, "rate {rate}");
    }

    #[test]
    fn superlinear_blows_up() {
        let m = model(Activation::polynomial(1.0, 1.0, 2.0).unwrap());
        let path = simulate(&InterArrivalState::empty(), &m, &SimConfig::new(3, 100_000)).unwrap();
        assert_eq!(path.status, PathStatus::BlowUpSuspected);
        assert!(*path.gaps.last().unwrap() < 1e-12);
    }

    #[test]
    fn increments_round_trip() {
        let m = model(Activation::polynomial(1.0, 1.0, 0.5).unwrap());
        let path = simulate(&InterArrivalState::empty(), &m, &SimConfig::new(9, 500)).unwrap();
        let inc = compensator_increments(&path, &InterArrivalState::empty(), &m, 1e-10).unwrap();
        for (a, b) in inc.iter().zip(&path.e_used) {
            assert!((a - b).abs() <= 1e-9);
        }
        let p = simulate(&st(&[0.4]), &poisson2(), &SimConfig::new(9, 100)).unwrap();
        let inc = compensator_increments(&p, &st(&[0.4]), &poisson2(), 1e-10).unwrap();
        for (a, g) in inc.iter().zip(&p.gaps) {
            assert_abs_diff_eq!(*a, 2.0 * g, epsilon = 1e-12);
        }
    }

    #[test]
    fn tampered_path_fails_integrity() {
        let mut path = simulate(&InterArrivalState::empty(), &affine11(), &SimConfig::new(2, 10)).unwrap();
        path.e_used[4] += 1e-6;
        let r = compensator_increments(&path, &InterArrivalState::empty(), &affine11(), 1e-10);
        assert!(matches!(r, Err(HawkesError::Integrity { index: 4, .. })));
    }

    #[test]
    fn thinning_constant_rate() {
        let mut rng = StreamRng::new(4);
        let n = 20_000;
        let num = Numerics::default();
        let mean = (0..n)
            .map(|_| next_gap_thinning(&st(&[0.1]), &mut rng, &poisson2(), &num).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 3.0 * 0.5 / (n as f64).sqrt());
    }

    #[test]
    fn thinning_matches_inversion_mean() {
        let m = affine11();
        let num = Numerics::default();
        let x = InterArrivalState::empty();
        let n = 10_000;
        let mut r1 = StreamRng::new(10);
        let mut r2 = StreamRng::new(11);
        let a: Vec<f64> = (0..n)
            .map(|_| next_gap_thinning(&x, &mut r1, &m, &num).unwrap())
            .collect();
        let b: Vec<f64> = (0..n)
            .map(|_| next_gap_inverse(&x, r2.exp1(), &m, &num).unwrap())
            .collect();
        let stats = |v: &[f64]| {
            let mu = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
            (mu, var / v.len() as f64)
        };
        let ((ma, va), (mb, vb)) = (stats(&a), stats(&b));
        assert!((ma - mb).abs() < 3.0 * (va + vb).sqrt());
    }

    #[test]
    fn random_walk_bound_affine() {
        let m = model(Activation::affine(1.0, 0.5).unwrap());
        let path = simulate(&InterArrivalState::empty(), &m, &SimConfig::new(8, 10_000)).unwrap();
        assert!(random_walk_bound_check(&path, &m, 0.1).unwrap());
    }

    #[test]
    fn random_walk_bound_constant_rate() {
        let path = simulate(&InterArrivalState::empty(), &poisson2(), &SimConfig::new(8, 2000)).unwrap();
        let r = random_walk_bound(&path, &poisson2(), 0.1, 1e-10).unwrap();
        assert!(r.holds);
        assert_eq!(r.beta0, 0.0);
    }

    #[test]
    fn random_walk_bound_sublinear() {
        let m = model(Activation::polynomial(1.0, 1.0, 0.5).unwrap());
        for seed in 0..100 {
            let path = simulate(&InterArrivalState::empty(), &m, &SimConfig::new(seed, 200)).unwrap();
            assert!(random_walk_bound_check(&path, &m, 0.1).unwrap(), "seed {seed}");
        }
        let sup = model(Activation::polynomial(1.0, 1.0, 2.0).unwrap());
        let path = simulate(&InterArrivalState::empty(), &sup, &SimConfig::new(0, 5)).unwrap();
        assert!(matches!(
            random_walk_bound_check(&path, &sup, 0.1),
            Err(HawkesError::Unsupported(_))
        ));
    }

    #[test]
    fn random_walk_bound_tabulated_kernel() {
        let k = MemoryKernel::tabulated(vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.25]).unwrap();
        let m = ModelParams::new(k, Activation::affine(1.0, 0.5).unwrap()).unwrap();
        let path = simulate(&InterArrivalState::empty(), &m, &SimConfig::new(8, 3000)).unwrap();
        assert!(random_walk_bound_check(&path, &m, 0.1).unwrap());
    }

    #[test]
    fn tabulated_kernel_matches_quadrature_oracle() {
        // h = 1 on [0, 1], 0 after; x = (0.5): S(s) = 1 + 1{s <= 0.5} for s <= 1
        let k = MemoryKernel::tabulated(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        let m = ModelParams::new(k, Activation::affine(1.0, 1.0).unwrap()).unwrap();
        let v = cumulative_intensity(&st(&[0.5]), 2.0, &m, 1e-11).unwrap();
        // rate 3 on [0, .5], 2 on (.5, 1], 1 after
        assert_abs_diff_eq!(v, 1.5 + 1.0 + 1.0, epsilon = 1e-10);
    }

    #[test]
    fn reproducible() {
        let m = model(Activation::polynomial(1.0, 1.0, 0.5).unwrap());
        let a = simulate(&InterArrivalState::empty(), &m, &SimConfig::new(77, 300)).unwrap();
        let b = simulate(&InterArrivalState::empty(), &m, &SimConfig::new(77, 300)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn inverse_round_trip(gaps in prop::collection::vec(0.05f64..2.0, 0..8), e in 0.001f64..8.0,
                              gamma in prop::sample::select(vec![0.5, 1.0, 2.0])) {
            let m = model(Activation::polynomial(1.0, 0.8, gamma).unwrap());
            let x = st(&gaps);
            let num = Numerics::default();
            let g = next_gap_inverse(&x, e, &m, &num).unwrap();
            let back = cumulative_intensity(&x, g, &m, num.tol).unwrap();
            prop_assert!((back - e).abs() <= 10.0 * num.tol);
        }

        #[test]
        fn inverse_monotone_in_e(gaps in prop::collection::vec(0.05f64..2.0, 0..8),
                                 mut es in prop::collection::vec(0.001f64..8.0, 2..10)) {
            let m = model(Activation::affine(1.0, 0.5).unwrap());
            let x = st(&gaps);
            es.sort_by(f64::total_cmp);
            es.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            let num = Numerics::default();
            let gs: Vec<f64> = es.iter().map(|&e| next_gap_inverse(&x, e, &m, &num).unwrap()).collect();
            prop_assert!(gs.windows(2).all(|w| w[1] > w[0]));
        }
    }
}
