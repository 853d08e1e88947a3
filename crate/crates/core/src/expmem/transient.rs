//! Scaling checks for the explosive regime `Φ(u) = (ν + βu)^γ`, `γ >= 2`.

use serde::{Deserialize, Serialize};

use super::zchain::simulate_z;
use crate::error::{HawkesError, Result};
use crate::model::Activation;
use crate::rng::StreamRng;
use crate::stats;

/// Window length for the renewal-count dispersion check.
pub const COUNT_WINDOW: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransientReport {
    pub gamma: f64,
    pub beta: f64,
    pub nu: f64,
    pub alpha: f64,
    pub n_events: usize,
    /// `Z_n / n` for `n = 1..=n_events`.
    pub ratio_series: Vec<f64>,
    pub final_ratio: f64,
    /// Index `n` of the first rescaled gap.
    pub rescaled_start: usize,
    /// `β^γ n^γ X_{n+1}` over the last quarter of the run.
    pub rescaled_gaps: Vec<f64>,
    pub rescaled_mean: f64,
    pub ks_stat: f64,
    pub ks_p: f64,
    pub count_window: f64,
    pub count_windows: usize,
    pub count_dispersion: f64,
    pub dispersion_p: f64,
}

/// Runs the chain from `Z_0 = 1` and checks `Z_n / n → 1` and that the
/// rescaled gaps of the last quarter look like a unit-rate Poisson process.
pub fn transient_experiment(
    gamma: f64,
    nu: f64,
    beta: f64,
    alpha: f64,
    n_events: usize,
    rng: &mut StreamRng,
    tol: f64,
) -> Result<TransientReport> {
    if !(gamma >= 2.0) {
        return Err(HawkesError::Domain(format!(
            "transient scaling needs γ >= 2, got {gamma}"
        )));
    }
    if n_events < 400 {
        return Err(HawkesError::Domain(format!(
            "transient scaling needs at least 400 events, got {n_events}"
        )));
    }
    let act = Activation::polynomial(nu, beta, gamma)?;
    let path = simulate_z(1.0, n_events, &act, alpha, rng, tol, None)?;

    let ratio_series: Vec<f64> = (1..=n_events).map(|n| path.z[n] / n as f64).collect();
    let start = (3 * n_events).div_ceil(4);
    let scale = beta.powf(gamma);
    // gaps[n] is X_{n+1}
    let rescaled_gaps: Vec<f64> = (start..n_events)
        .map(|n| scale * (n as f64).powf(gamma) * path.gaps[n])
        .collect();
    let ks = stats::ks_one_sample(&rescaled_gaps, stats::exp_cdf(1.0))?;
    let counts = window_counts(&rescaled_gaps, COUNT_WINDOW);
    let disp = stats::poisson_dispersion(&counts)?;
    Ok(TransientReport {
        gamma,
        beta,
        nu,
        alpha,
        n_events,
        final_ratio: *ratio_series.last().unwrap(),
        ratio_series,
        rescaled_start: start,
        rescaled_mean: rescaled_gaps.iter().sum::<f64>() / rescaled_gaps.len() as f64,
        rescaled_gaps,
        ks_stat: ks.statistic,
        ks_p: ks.p_value,
        count_window: COUNT_WINDOW,
        count_windows: counts.len(),
        count_dispersion: disp.statistic,
        dispersion_p: disp.p_value,
    })
}

/// Counts of the points with the given spacings in consecutive windows of
/// length `w`; the incomplete last window is dropped.
pub fn window_counts(spacings: &[f64], w: f64) -> Vec<u64> {
    let total: f64 = spacings.iter().sum();
    let windows = (total / w).floor() as usize;
    let mut counts = vec![0u64; windows];
    let mut t = 0.0;
    for s in spacings {
        t += s;
        let i = (t / w).floor() as usize;
        if i < windows {
            counts[i] += 1;
        }
    }
    counts
}
