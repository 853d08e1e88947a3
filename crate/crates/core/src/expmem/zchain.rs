//! The scalar chain `Z_{n+1} = 1 + e^{-X_{n+1}/α} Z_n` for `h(t) = e^{-t/α}`.
//!
//! `Z_n` is the excitation just after the n-th point, the point itself
//! included. The next gap solves `∫_0^X Φ(Z_n e^{-s/α}) ds = E_{n+1}`.

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::history::{excitation_sum, InterArrivalState};
use crate::model::{Activation, MemoryKernel};
use crate::rng::StreamRng;
use crate::roots::{invert, Compensator};
use crate::simulator::{KahanSum, PathStatus};
use crate::stats;

const TIME_CAP: f64 = 1e6;

/// `s ↦ Φ(z e^{-s/α})` with its integral in closed form where available.
pub struct ZIntensity<'a> {
    pub z: f64,
    pub act: &'a Activation,
    pub alpha: f64,
}

impl ZIntensity<'_> {
    /// `∫_0^t Φ(z e^{-s/α}) ds`.
    pub fn forward(&self, t: f64, tol: f64) -> f64 {
        let (z, a) = (self.z, self.alpha);
        match self.act {
            Activation::Affine { nu, beta } => nu * t - a * beta * z * (-t / a).exp_m1(),
            Activation::Polynomial { nu, beta, gamma } if gamma.fract() == 0.0 && (1.0..=16.0).contains(gamma) => {
                let g = *gamma as i32;
                let bz = beta * z;
                let mut acc = nu.powi(g) * t;
                let mut binom = 1.0;
                for j in 1..=g {
                    binom = binom * f64::from(g - j + 1) / f64::from(j);
                    let jf = f64::from(j);
                    let ij = -(a / jf) * (-jf * t / a).exp_m1();
                    acc += binom * nu.powi(g - j) * bz.powi(j) * ij;
                }
                acc
            }
            _ => a * self.act.phi_over_u_integral(z * (-t / a).exp(), z, tol / a),
        }
    }
}

impl Compensator for ZIntensity<'_> {
    #[inline]
    fn rate(&self, t: f64) -> f64 {
        self.act.phi(self.z * (-t / self.alpha).exp())
    }

    fn increment(&self, a: f64, b: f64, tol: f64) -> f64 {
        match self.act {
            Activation::Affine { .. } => self.forward(b, tol) - self.forward(a, tol),
            Activation::Polynomial { gamma, .. } if gamma.fract() == 0.0 && (1.0..=16.0).contains(gamma) => {
                self.forward(b, tol) - self.forward(a, tol)
            }
            _ => {
                let za = self.z * (-a / self.alpha).exp();
                let zb = self.z * (-b / self.alpha).exp();
                self.alpha * self.act.phi_over_u_integral(zb, za, tol / self.alpha)
            }
        }
    }
}

fn check_z(z: f64) -> Result<()> {
    if !(z >= 1.0 && z.is_finite()) {
        return Err(HawkesError::Domain(format!("Z must be finite and >= 1, got {z}")));
    }
    Ok(())
}

/// `G_Φ(z, y)`: the `t` with `∫_0^t Φ(z e^{-s/α}) ds = y`.
pub fn g_phi(z: f64, y: f64, act: &Activation, alpha: f64, tol: f64) -> Result<f64> {
    check_z(z)?;
    if !(y > 0.0) {
        return Err(HawkesError::Domain(format!("G_Φ needs y > 0, got {y}")));
    }
    invert(&ZIntensity { z, act, alpha }, y, tol, TIME_CAP)
}

/// One step: the gap and `1 + e^{-gap/α} z`.
pub fn z_step(z: f64, e: f64, act: &Activation, alpha: f64, tol: f64) -> Result<(f64, f64)> {
    let gap = g_phi(z, e, act, alpha, tol)?;
    Ok((gap, 1.0 + (-gap / alpha).exp() * z))
}

/// `Z_0 = Σ_{k>=0} e^{-o_k/α}` over the points of `x`, 0 included.
pub fn z_from_state(x: &InterArrivalState, alpha: f64) -> Result<f64> {
    let kernel = MemoryKernel::exponential(alpha)?;
    Ok(excitation_sum(x, 0.0, &kernel, 1e-300)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZPath {
    pub gaps: Vec<f64>,
    /// `Z_0, Z_1, ...`, one longer than `gaps`.
    pub z: Vec<f64>,
    pub e_used: Vec<f64>,
    pub times: Vec<f64>,
    pub status: PathStatus,
}

/// Runs the chain for up to `n_events` steps. With `min_gap`, a gap below it
/// is recorded and ends the run with a blow-up status.
pub fn simulate_z(
    z0: f64,
    n_events: usize,
    act: &Activation,
    alpha: f64,
    rng: &mut StreamRng,
    tol: f64,
    min_gap: Option<f64>,
) -> Result<ZPath> {
    check_z(z0)?;
    let cap = n_events.min(1 << 22);
    let mut path = ZPath {
        gaps: Vec::with_capacity(cap),
        z: Vec::with_capacity(cap + 1),
        e_used: Vec::with_capacity(cap),
        times: Vec::with_capacity(cap),
        status: PathStatus::Completed,
    };
    path.z.push(z0);
    let mut z = z0;
    let mut clock = KahanSum::default();
    for _ in 0..n_events {
        let e = rng.exp1();
        let (gap, next) = z_step(z, e, act, alpha, tol)?;
        if !(gap > 0.0) {
            return Err(HawkesError::Unsupported(format!(
                "gap underflow at Z = {z}; the run is beyond double precision"
            )));
        }
        path.gaps.push(gap);
        path.e_used.push(e);
        path.times.push(clock.add(gap));
        path.z.push(next);
        z = next;
        if min_gap.is_some_and(|m| gap < m) {
            path.status = PathStatus::BlowUpSuspected;
            break;
        }
    }
    Ok(path)
}

/// Number of steps until the first gap below `min_gap`, if any within
/// `n_events`. Keeps no history.
pub fn steps_to_blow_up(
    z0: f64,
    n_events: usize,
    act: &Activation,
    alpha: f64,
    rng: &mut StreamRng,
    tol: f64,
    min_gap: f64,
) -> Result<Option<usize>> {
    check_z(z0)?;
    let mut z = z0;
    for n in 1..=n_events {
        let (gap, next) = z_step(z, rng.exp1(), act, alpha, tol)?;
        if gap < min_gap {
            return Ok(Some(n));
        }
        z = next;
    }
    Ok(None)
}

/// `F(y) = ∫_1^{y-1} Φ(u)/u du` (negative for `y < 2`).
pub fn lyapunov_f(y: f64, act: &Activation, tol: f64) -> Result<f64> {
    if !(y > 1.0) {
        return Err(HawkesError::Domain(format!("Lyapunov function needs y > 1, got {y}")));
    }
    Ok(act.phi_over_u_integral(1.0, y - 1.0, tol))
}

/// `E_{n+1}` recovered from `Z_n` and `Z_{n+1}` alone:
/// `α ∫_{Z_{n+1}-1}^{Z_n} Φ(u)/u du`.
pub fn increment_from_z(z: f64, z_next: f64, act: &Activation, alpha: f64, tol: f64) -> f64 {
    alpha * act.phi_over_u_integral(z_next - 1.0, z, tol / alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryZ {
    /// `Z_n` for the kept steps.
    pub z: Vec<f64>,
    /// `E_{n+1}` paired with each kept `Z_n`.
    pub e: Vec<f64>,
}

/// A long run from `Z_0 = 1` with the first `n_burn` steps dropped. Needs
/// `α β_e < 1`.
pub fn stationary_z(
    act: &Activation,
    alpha: f64,
    n_burn: usize,
    n_keep: usize,
    rng: &mut StreamRng,
    tol: f64,
) -> Result<StationaryZ> {
    let be = act.beta_e(1e8, 1e-10)?;
    if !(alpha * be < 1.0) {
        return Err(HawkesError::Unsupported(format!(
            "no stationary regime: α β_e = {}",
            alpha * be
        )));
    }
    let mut z = 1.0;
    for _ in 0..n_burn {
        z = z_step(z, rng.exp1(), act, alpha, tol)?.1;
    }
    let mut out = StationaryZ {
        z: Vec::with_capacity(n_keep),
        e: Vec::with_capacity(n_keep),
    };
    for _ in 0..n_keep {
        let e = rng.exp1();
        out.z.push(z);
        out.e.push(e);
        z = z_step(z, e, act, alpha, tol)?.1;
    }
    Ok(out)
}

/// Gaps `X_{n+1} = G_Φ(Z_n, E_{n+1})` along a stationary run.
pub fn palm_gaps_from_z(z_path: &[f64], e_path: &[f64], act: &Activation, alpha: f64, tol: f64) -> Result<Vec<f64>> {
    if z_path.len() != e_path.len() {
        return Err(HawkesError::Domain("Z and E paths differ in length".into()));
    }
    z_path
        .iter()
        .zip(e_path)
        .map(|(&z, &e)| g_phi(z, e, act, alpha, tol))
        .collect()
}

/// Mean of the gaps with a batch-means standard error.
pub fn gap_mean(gaps: &[f64]) -> Result<(f64, f64)> {
    stats::batch_mean_se(gaps, 50)
}
