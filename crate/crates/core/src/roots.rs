//! Inversion of monotone cumulative-intensity functions.
//!
//! A [`Compensator`] exposes a non-negative rate `r(t)` and the integral of
//! `r` over any interval. [`first_passage`] finds the time at which the
//! cumulative integral from 0 first reaches a target, using exponential
//! bracketing and Newton steps (the derivative is the rate itself),
//! safeguarded by bisection once a bracket is known.

use crate::error::{HawkesError, Result};

const MAX_ITER: usize = 400;

pub trait Compensator {
    /// Instantaneous rate at time `t >= 0`.
    fn rate(&self, t: f64) -> f64;

    /// Signed integral of the rate over `[a, b]` to absolute tolerance `tol`.
    fn increment(&self, a: f64, b: f64, tol: f64) -> f64;
}

impl<C: Compensator + ?Sized> Compensator for &C {
    fn rate(&self, t: f64) -> f64 {
        (**self).rate(t)
    }
    fn increment(&self, a: f64, b: f64, tol: f64) -> f64 {
        (**self).increment(a, b, tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Passage {
    /// The cumulative integral reaches the target at this time.
    Hit(f64),
    /// The integral up to the cap stays below the target.
    Beyond { reached: f64 },
}

/// Solves `∫_0^t r = target` for `t`, to absolute residual `tol`.
pub fn first_passage<C: Compensator + ?Sized>(comp: &C, target: f64, tol: f64, cap: f64) -> Result<Passage> {
    if !(target >= 0.0) || !target.is_finite() {
        return Err(HawkesError::Domain(format!("inversion target {target}")));
    }
    if target <= tol {
        // Λ(0) = 0 already meets the target within tolerance; refine only if
        // the rate gives a meaningful first-order step.
        let r = comp.rate(0.0);
        return Ok(Passage::Hit(if r > 0.0 { target / r } else { 0.0 }));
    }
    let seg_tol = tol / 20.0;
    let mut t = 0.0_f64;
    let mut lam = 0.0_f64;
    let mut lo = 0.0_f64;
    let mut hi: Option<f64> = None;
    let mut residual = target;

    for _ in 0..MAX_ITER {
        residual = target - lam;
        if residual.abs() <= tol {
            return Ok(Passage::Hit(t));
        }
        let r = comp.rate(t);
        let newton = if r > 0.0 && r.is_finite() {
            t + residual / r
        } else {
            f64::NAN
        };
        let candidate = match hi {
            None => {
                if t >= cap {
                    return Ok(Passage::Beyond { reached: lam });
                }
                let grow = if t > 0.0 { 2.0 * t } else { 1.0 };
                let c = if newton.is_finite() && newton > t { newton } else { grow };
                c.min(cap)
            }
            Some(h) => {
                if newton > lo && newton < h {
                    newton
                } else {
                    0.5 * (lo + h)
                }
            }
        };
        lam += comp.increment(t, candidate, seg_tol);
        t = candidate;
        if lam < target {
            lo = t;
        } else {
            hi = Some(t);
        }
        if let Some(h) = hi {
            if h - lo <= 4.0 * f64::EPSILON * h.max(f64::MIN_POSITIVE) {
                return Ok(Passage::Hit(t));
            }
        }
    }
    Err(HawkesError::NoConvergence {
        iterations: MAX_ITER,
        residual,
    })
}

/// Like [`first_passage`] but treats failing to reach the target before the
/// cap as an error.
pub fn invert<C: Compensator + ?Sized>(comp: &C, target: f64, tol: f64, cap: f64) -> Result<f64> {
    match first_passage(comp, target, tol, cap)? {
        Passage::Hit(t) => Ok(t),
        Passage::Beyond { reached } => Err(HawkesError::UnboundedSearch { cap, reached, target }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    struct Constant(f64);
    impl Compensator for Constant {
        fn rate(&self, _t: f64) -> f64 {
            self.0
        }
        fn increment(&self, a: f64, b: f64, _tol: f64) -> f64 {
            self.0 * (b - a)
        }
    }

    /// Rate 1 + e^{-t}; Λ(t) = t + 1 - e^{-t}.
    struct Decaying;
    impl Compensator for Decaying {
        fn rate(&self, t: f64) -> f64 {
            1.0 + (-t).exp()
        }
        fn increment(&self, a: f64, b: f64, _tol: f64) -> f64 {
            (b - a) + (-a).exp() - (-b).exp()
        }
    }

    /// Rate e^{-t}: total mass 1.
    struct Finite;
    impl Compensator for Finite {
        fn rate(&self, t: f64) -> f64 {
            (-t).exp()
        }
        fn increment(&self, a: f64, b: f64, _tol: f64) -> f64 {
            (-a).exp() - (-b).exp()
        }
    }

    /// Zero until 3, then 2.
    struct Delayed;
    impl Compensator for Delayed {
        fn rate(&self, t: f64) -> f64 {
            if t < 3.0 {
                0.0
            } else {
                2.0
            }
        }
        fn increment(&self, a: f64, b: f64, _tol: f64) -> f64 {
            let cum = |t: f64| 2.0 * (t - 3.0).max(0.0);
            cum(b) - cum(a)
        }
    }

    #[test]
    fn constant_rate() {
        assert_abs_diff_eq!(invert(&Constant(2.0), 1.0, 1e-12, 1e6).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn omega_constant() {
        // t + 1 - e^{-t} = 1  <=>  t = e^{-t}; bisection oracle gives 0.5671432904097838.
        let t = invert(&Decaying, 1.0, 1e-13, 1e6).unwrap();
        assert_abs_diff_eq!(t, 0.567_143_290_409_783_8, epsilon = 1e-12);
    }

    #[test]
    fn finite_mass_never_reached() {
        match first_passage(&Finite, 2.0, 1e-12, 1e6).unwrap() {
            Passage::Beyond { reached } => assert_abs_diff_eq!(reached, 1.0, epsilon = 1e-9),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            invert(&Finite, 2.0, 1e-12, 1e6),
            Err(HawkesError::UnboundedSearch { .. })
        ));
    }

    #[test]
    fn zero_rate_prefix() {
        let t = invert(&Delayed, 1.0, 1e-12, 1e6).unwrap();
        assert_abs_diff_eq!(t, 3.5, epsilon = 1e-11);
    }

    #[test]
    fn tiny_target() {
        let t = invert(&Constant(4.0), 1e-14, 1e-10, 1e6).unwrap();
        assert!(t > 0.0 && t < 1e-13);
    }
}
