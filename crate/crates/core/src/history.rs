//! Inter-arrival sequences, their point measures and excitation sums.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::model::MemoryKernel;

/// Partial excitation sums above this are treated as divergent.
pub const DIVERGENCE_CAP: f64 = 1e8;

/// A past seen from the point at 0: `gaps[0]` is the distance from 0 to the
/// previous point, `gaps[1]` the one before that, and so on.
///
/// With `tail_infinite` every coordinate past the stored ones is `+∞`, so
/// the past is exactly the stored points. Without it the stored gaps are a
/// prefix of a longer, unknown past.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState")]
pub struct InterArrivalState {
    gaps: VecDeque<f64>,
    tail_infinite: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    gaps: Vec<f64>,
    tail_infinite: bool,
}

impl TryFrom<RawState> for InterArrivalState {
    type Error = HawkesError;
    fn try_from(raw: RawState) -> Result<Self> {
        InterArrivalState::from_gaps(raw.gaps, raw.tail_infinite)
    }
}

impl Default for InterArrivalState {
    fn default() -> Self {
        Self::empty()
    }
}

impl InterArrivalState {
    /// The past with a single point at 0.
    pub fn empty() -> Self {
        Self {
            gaps: VecDeque::new(),
            tail_infinite: true,
        }
    }

    pub fn from_gaps(gaps: Vec<f64>, tail_infinite: bool) -> Result<Self> {
        if let Some(g) = gaps.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(HawkesError::Domain(format!("gaps must be finite and > 0, got {g}")));
        }
        Ok(Self {
            gaps: gaps.into(),
            tail_infinite,
        })
    }

    pub fn gaps(&self) -> &VecDeque<f64> {
        &self.gaps
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty() && self.tail_infinite
    }

    pub fn tail_infinite(&self) -> bool {
        self.tail_infinite
    }

    /// Coordinate `k >= 1`, `+∞` past the stored ones.
    pub fn coord(&self, k: usize) -> f64 {
        self.gaps.get(k - 1).copied().unwrap_or(f64::INFINITY)
    }

    /// `(g, x)`: the state seen from a new point placed `g` after 0.
    pub fn prepend_gap(&self, g: f64) -> Result<Self> {
        let mut next = self.clone();
        next.prepend_in_place(g)?;
        Ok(next)
    }

    pub fn prepend_in_place(&mut self, g: f64) -> Result<()> {
        if !(g.is_finite() && g > 0.0) {
            return Err(HawkesError::Domain(format!("gap must be finite and > 0, got {g}")));
        }
        self.gaps.push_front(g);
        Ok(())
    }

    /// Keeps at most `n` stored gaps; the rest become unknown.
    pub fn truncate(&mut self, n: usize) {
        if self.gaps.len() > n {
            self.gaps.truncate(n);
            self.tail_infinite = false;
        }
    }

    /// Distances from 0 to the stored past points, nearest first.
    pub fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        self.gaps.iter().scan(0.0, |acc, g| {
            *acc += g;
            Some(*acc)
        })
    }
}

/// Points `0 = t_0 > t_1 > ...` on the negative half-line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMeasure {
    pub points: Vec<f64>,
}

impl PointMeasure {
    /// Consecutive distances, nearest first.
    pub fn gaps(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[0] - w[1]).collect()
    }
}

pub fn to_point_measure(x: &InterArrivalState) -> PointMeasure {
    let mut points = Vec::with_capacity(x.len() + 1);
    points.push(0.0);
    points.extend(x.offsets().map(|o| -o));
    PointMeasure { points }
}

/// `S(t, x) = h(t) + Σ_k h(t + x_1 + ... + x_k)` and a bound on what was
/// left out.
///
/// Terms are added nearest first. With an exponential kernel the sum stops
/// once the remaining stored terms, each at most the current one, total less
/// than `eps_tail`; that total is the reported bound. Tabulated kernels stop
/// exactly at the cutoff. If the stored gaps are only a prefix the unknown
/// remainder is unbounded and the bound is `+∞`.
pub fn excitation_sum(x: &InterArrivalState, t: f64, kernel: &MemoryKernel, eps_tail: f64) -> Result<(f64, f64)> {
    excitation_sum_capped(x, t, kernel, eps_tail, DIVERGENCE_CAP)
}

pub fn excitation_sum_capped(
    x: &InterArrivalState,
    t: f64,
    kernel: &MemoryKernel,
    eps_tail: f64,
    cap: f64,
) -> Result<(f64, f64)> {
    if t.is_nan() || t < 0.0 {
        return Err(HawkesError::Domain(format!("excitation sum at t = {t}")));
    }
    if t == f64::INFINITY {
        return Ok((0.0, 0.0));
    }
    let unknown = if x.tail_infinite { 0.0 } else { f64::INFINITY };
    let cutoff = kernel.cutoff();
    let n = x.gaps.len();
    let mut sum = kernel.h(t);
    let mut offset = t;
    for (k, g) in x.gaps.iter().enumerate() {
        offset += g;
        if let Some(c) = cutoff {
            if offset > c {
                return Ok((sum, unknown));
            }
        }
        let v = kernel.h(offset);
        let remaining = (n - k) as f64;
        if cutoff.is_none() && remaining * v < eps_tail {
            return Ok((sum, remaining * v + unknown));
        }
        sum += v;
        if sum > cap {
            return Err(HawkesError::DivergentExcitation { partial: sum, cap });
        }
    }
    Ok((sum, unknown))
}

/// `Σ_{k <= k_max} 2^{-k} min(|x_k - y_k|, 1)` with `|u - ∞| = ∞` and
/// `|∞ - ∞| = 0`.
pub fn seq_distance(x: &InterArrivalState, y: &InterArrivalState, k_max: usize) -> f64 {
    let mut d = 0.0;
    let mut w = 1.0;
    for k in 1..=k_max {
        w *= 0.5;
        let (a, b) = (x.coord(k), y.coord(k));
        let term = match (a.is_infinite(), b.is_infinite()) {
            (true, true) => 0.0,
            (true, false) | (false, true) => 1.0,
            _ => (a - b).abs().min(1.0),
        };
        d += w * term;
        if k > x.len() && k > y.len() {
            break;
        }
    }
    d
}
