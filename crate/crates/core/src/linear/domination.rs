//! Pathwise domination by an affine model driven by the same draws.

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::history::InterArrivalState;
use crate::model::{Activation, ModelParams};
use crate::rng::StreamRng;
use crate::simulator::{next_gap_inverse, KahanSum, Numerics, PathStatus, PointPath};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominatedPair {
    pub original: PointPath,
    /// Path of `ν₀ + β₀ u` with the same kernel and draws.
    pub dominating: PointPath,
    /// `min_n (X_n - Y_n)`.
    pub min_margin: f64,
}

fn check_dominates(act: &Activation, nu0: f64, beta0: f64) -> Result<()> {
    let mut u = 0.0;
    let mut step = 1e-3;
    while u < 1e9 {
        let bound = (nu0 + beta0 * u) * (1.0 + 1e-12);
        if act.phi(u) > bound {
            return Err(HawkesError::Domain(format!(
                "Φ({u}) = {} exceeds {nu0} + {beta0} u",
                act.phi(u)
            )));
        }
        u += step;
        step *= 1.1;
    }
    Ok(())
}

/// Runs `model` and its affine dominator from the empty history with one
/// shared stream. Errors if a dominating gap is longer than the original.
pub fn dominated_pair(
    model: &ModelParams,
    dominator: (f64, f64),
    n: usize,
    rng: &mut StreamRng,
    num: &Numerics,
) -> Result<DominatedPair> {
    let (nu0, beta0) = dominator;
    check_dominates(&model.activation, nu0, beta0)?;
    let upper = ModelParams::new(model.kernel.clone(), Activation::affine(nu0, beta0)?)?;
    let mut xs = InterArrivalState::empty();
    let mut ys = InterArrivalState::empty();
    let mut orig = empty_path(n);
    let mut dom = empty_path(n);
    let (mut cx, mut cy) = (KahanSum::default(), KahanSum::default());
    let mut min_margin = f64::INFINITY;
    for i in 0..n {
        let e = rng.exp1();
        let x = next_gap_inverse(&xs, e, model, num)?;
        let y = next_gap_inverse(&ys, e, &upper, num)?;
        if y > x + 10.0 * num.tol {
            return Err(HawkesError::InvariantViolation(format!(
                "step {}: dominating gap {y} exceeds {x}",
                i + 1
            )));
        }
        min_margin = min_margin.min(x - y);
        push(&mut orig, &mut cx, x, e);
        push(&mut dom, &mut cy, y, e);
        xs.prepend_in_place(x)?;
        ys.prepend_in_place(y)?;
    }
    Ok(DominatedPair {
        original: orig,
        dominating: dom,
        min_margin,
    })
}

fn empty_path(n: usize) -> PointPath {
    PointPath {
        gaps: Vec::with_capacity(n),
        times: Vec::with_capacity(n),
        e_used: Vec::with_capacity(n),
        status: PathStatus::Completed,
    }
}

fn push(p: &mut PointPath, clock: &mut KahanSum, gap: f64, e: f64) {
    p.gaps.push(gap);
    p.times.push(clock.add(gap));
    p.e_used.push(e);
}
