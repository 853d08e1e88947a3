//! Goodness-of-fit tests and summary statistics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{HawkesError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    /// Second sample size for two-sample tests.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

const MIN_KS: usize = 10;

fn check_sample(sample: &[f64], what: &str) -> Result<Vec<f64>> {
    if sample.len() < MIN_KS {
        return Err(HawkesError::Statistics(format!(
            "{what} needs at least {MIN_KS} observations, got {}",
            sample.len()
        )));
    }
    if sample.iter().any(|v| v.is_nan()) {
        return Err(HawkesError::Statistics(format!("{what}: sample contains NaN")));
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let p = if lambda < 1.18 {
        // Jacobi theta form converges fast for small λ
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            cdf += (-j * j * c).exp();
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * cdf
    } else {
        let mut acc = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            acc += if k % 2 == 1 { term } else { -term };
            if term < 1e-300 {
                break;
            }
        }
        2.0 * acc
    };
    p.clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test against `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<TestResult> {
    let v = check_sample(sample, "one-sample KS")?;
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    let d = d.clamp(0.0, 1.0);
    Ok(TestResult {
        statistic: d,
        p_value: kolmogorov_sf(n.sqrt() * d),
        n: v.len(),
        m: None,
    })
}

/// Two-sample Kolmogorov-Smirnov test with the effective size `nm/(n+m)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    let a = check_sample(a, "two-sample KS")?;
    let b = check_sample(b, "two-sample KS")?;
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    Ok(TestResult {
        statistic: d,
        p_value: kolmogorov_sf(ne.sqrt() * d),
        n,
        m: Some(m),
    })
}

/// Index of dispersion (variance over mean) of window counts, with the
/// two-sided chi-square p-value of `(k - 1) · dispersion` on `k - 1`
/// degrees of freedom.
pub fn poisson_dispersion(counts: &[u64]) -> Result<TestResult> {
    let k = counts.len();
    if k < 30 {
        return Err(HawkesError::Statistics(format!(
            "dispersion test needs at least 30 windows, got {k}"
        )));
    }
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let mean = xs.iter().sum::<f64>() / k as f64;
    if mean == 0.0 {
        return Err(HawkesError::Statistics(
            "dispersion of all-zero counts is undefined".into(),
        ));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    let dispersion = var / mean;
    let chi = ChiSquared::new((k - 1) as f64).map_err(|e| HawkesError::Statistics(e.to_string()))?;
    let cdf = chi.cdf((k - 1) as f64 * dispersion);
    Ok(TestResult {
        statistic: dispersion,
        p_value: (2.0 * cdf.min(1.0 - cdf)).clamp(0.0, 1.0),
        n: k,
        m: None,
    })
}

/// Sample mean and its standard error.
pub fn mean_se(sample: &[f64]) -> Result<(f64, f64)> {
    let n = sample.len();
    if n < 2 {
        return Err(HawkesError::Statistics("mean needs at least two observations".into()));
    }
    let mean = sample.iter().sum::<f64>() / n as f64;
    let var = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok((mean, (var / n as f64).sqrt()))
}

/// Mean with a standard error from `batches` equal batch means, for
/// correlated sequences.
pub fn batch_mean_se(sample: &[f64], batches: usize) -> Result<(f64, f64)> {
    let size = sample.len() / batches.max(2);
    if size == 0 {
        return Err(HawkesError::Statistics("too few observations for batch means".into()));
    }
    let means: Vec<f64> = sample
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let (_, se) = mean_se(&means)?;
    let mean = sample.iter().sum::<f64>() / sample.len() as f64;
    Ok((mean, se))
}

/// Normal-approximation confidence interval `(mean, half_width)`.
pub fn mean_ci(sample: &[f64], level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(HawkesError::Statistics(format!(
            "confidence level must be in (0, 1), got {level}"
        )));
    }
    let (mean, se) = mean_se(sample)?;
    let z = Normal::standard().inverse_cdf(0.5 + 0.5 * level);
    Ok((mean, z * se))
}

/// Lag-one sample autocorrelation.
pub fn lag1_autocorrelation(sample: &[f64]) -> f64 {
    let n = sample.len();
    if n < 3 {
        return 0.0;
    }
    let mean = sample.iter().sum::<f64>() / n as f64;
    let denom: f64 = sample.iter().map(|x| (x - mean).powi(2)).sum();
    if denom == 0.0 {
        return 0.0;
    }
    let num: f64 = sample.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    num / denom
}

/// CDF of the exponential law with the given rate.
pub fn exp_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() }
}
