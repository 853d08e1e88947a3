//! Cesàro averages of the gap law along one path from the empty history.

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::history::InterArrivalState;
use crate::model::ModelParams;
use crate::rng::StreamRng;
use crate::simulator::{simulate_with_rng, Numerics, PathStatus, SimConfig};

pub const QUANTILE_LEVELS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];
const W1_GRID: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CesaroPoint {
    pub n: usize,
    pub mean_gap: f64,
    /// Empirical quantiles of `X_1..X_n` at [`QUANTILE_LEVELS`].
    pub quantiles: Vec<f64>,
    /// Wasserstein-1 distance to the previous checkpoint.
    pub w1_to_prev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CesaroReport {
    pub points: Vec<CesaroPoint>,
    pub status: PathStatus,
    #[serde(skip)]
    pub gaps: Vec<f64>,
}

/// `100, 1000, ...` up to `n_max`, with `n_max` itself last.
pub fn decade_checkpoints(n_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = 100;
    while n < n_max {
        out.push(n);
        n *= 10;
    }
    out.push(n_max);
    out
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    match sorted.get(i + 1) {
        Some(next) => sorted[i] + frac * (next - sorted[i]),
        None => sorted[i],
    }
}

/// `∫_0^1 |Q_a(p) - Q_b(p)| dp` on a midpoint grid.
pub fn wasserstein1(a_sorted: &[f64], b_sorted: &[f64]) -> f64 {
    (0..W1_GRID)
        .map(|i| {
            let p = (i as f64 + 0.5) / W1_GRID as f64;
            (quantile(a_sorted, p) - quantile(b_sorted, p)).abs()
        })
        .sum::<f64>()
        / W1_GRID as f64
}

pub fn cesaro_diagnostic(
    model: &ModelParams,
    n_max: usize,
    rng: &mut StreamRng,
    num: &Numerics,
    checkpoints: Option<&[usize]>,
) -> Result<CesaroReport> {
    if n_max < 2 {
        return Err(HawkesError::Domain("need at least two events".into()));
    }
    let checks = match checkpoints {
        Some(c) => {
            if c.is_empty() || c.windows(2).any(|w| w[1] <= w[0]) || c[0] < 2 || *c.last().unwrap() > n_max {
                return Err(HawkesError::Domain(
                    "checkpoints must increase within [2, n_max]".into(),
                ));
            }
            c.to_vec()
        }
        None => decade_checkpoints(n_max),
    };
    let mut cfg = SimConfig::new(0, n_max);
    cfg.inversion_tol = num.tol;
    cfg.eps_tail = num.eps_tail;
    cfg.time_cap = num.time_cap;
    let path = simulate_with_rng(&InterArrivalState::empty(), model, &cfg, rng)?;
    let mut points = Vec::new();
    let mut prev: Option<Vec<f64>> = None;
    for &n in checks.iter().filter(|&&n| n <= path.len()) {
        let mut sorted = path.gaps[..n].to_vec();
        sorted.sort_by(f64::total_cmp);
        points.push(CesaroPoint {
            n,
            mean_gap: path.gaps[..n].iter().sum::<f64>() / n as f64,
            quantiles: QUANTILE_LEVELS.iter().map(|&p| quantile(&sorted, p)).collect(),
            w1_to_prev: prev.as_ref().map(|p| wasserstein1(p, &sorted)),
        });
        prev = Some(sorted);
    }
    Ok(CesaroReport {
        points,
        status: path.status,
        gaps: path.gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Activation, MemoryKernel};

    #[test]
    fn checkpoint_grid() {
        assert_eq!(decade_checkpoints(10_000), vec![100, 1000, 10_000]);
        assert_eq!(decade_checkpoints(5000), vec![100, 1000, 5000]);
    }

    #[test]
    fn w1_of_shift() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 2.5).collect();
        assert!((wasserstein1(&a, &b) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn affine_averages_settle() {
        let m = ModelParams::new(
            MemoryKernel::exponential(1.0).unwrap(),
            Activation::affine(1.0, 0.5).unwrap(),
        )
        .unwrap();
        let r = cesaro_diagnostic(&m, 20_000, &mut StreamRng::new(1), &Numerics::default(), None).unwrap();
        assert_eq!(r.points.len(), 4);
        let last = r.points.last().unwrap();
        assert!((last.mean_gap - 0.5).abs() < 0.05, "{}", last.mean_gap);
        let w: Vec<f64> = r.points.iter().filter_map(|p| p.w1_to_prev).collect();
        assert!(w.last().unwrap() < &w[0]);
    }

    #[test]
    fn sublinear_runs() {
        let m = ModelParams::new(
            MemoryKernel::exponential(1.0).unwrap(),
            Activation::polynomial(1.0, 1.0, 0.5).unwrap(),
        )
        .unwrap();
        let r = cesaro_diagnostic(
            &m,
            2000,
            &mut StreamRng::new(2),
            &Numerics::default(),
            Some(&[500, 1000, 2000]),
        )
        .unwrap();
        assert_eq!(r.points.len(), 3);
        assert!(r.points.iter().all(|p| p.quantiles.windows(2).all(|w| w[0] <= w[1])));
        assert!(cesaro_diagnostic(&m, 100, &mut StreamRng::new(2), &Numerics::default(), Some(&[50, 40])).is_err());
    }
}
