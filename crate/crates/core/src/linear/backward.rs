//! Backward coupling for affine activations.
//!
//! With one fixed stream `E_1, E_2, ...`, depth `n` gives coordinates
//! `Y_n^n = T(∅, E_n)` and `Y_k^n = T((Y_{k+1}^n, ..., Y_n^n), E_k)`. Each
//! coordinate is non-increasing in `n`; the depth is doubled until the first
//! `K` coordinates stop moving.

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::history::InterArrivalState;
use crate::model::{Activation, ModelParams};
use crate::rng::StreamRng;
use crate::simulator::{next_gap_inverse, Numerics};

const MIN_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackwardSample {
    /// First `K` coordinates at the final depth.
    pub prefix: Vec<f64>,
    pub depth_used: usize,
    pub converged: bool,
    /// Largest decrease of a prefix coordinate at the last doubling.
    pub residual: f64,
    /// Coordinates that grew with depth by more than the numerical slack.
    pub monotone_violations: usize,
    /// All coordinates at the final depth.
    #[serde(skip)]
    pub coords: Vec<f64>,
    /// The exponential stream, `draws[k-1] = E_k`.
    #[serde(skip)]
    pub draws: Vec<f64>,
    /// `(depth, first K coordinates)` for every depth tried.
    #[serde(skip)]
    pub trace: Vec<(usize, Vec<f64>)>,
}

fn affine_params(model: &ModelParams) -> Result<(f64, f64)> {
    match model.activation {
        Activation::Affine { nu, beta } => {
            if model.kernel.alpha() * beta >= 1.0 {
                return Err(HawkesError::Unsupported(format!(
                    "no stationary regime: α β = {}",
                    model.kernel.alpha() * beta
                )));
            }
            Ok((nu, beta))
        }
        _ => Err(HawkesError::Unsupported(
            "backward coupling needs an affine activation".into(),
        )),
    }
}

/// Coordinates `Y_1^n, ..., Y_n^n` from the first `n` draws.
fn coordinates(draws: &[f64], model: &ModelParams, num: &Numerics) -> Result<Vec<f64>> {
    let n = draws.len();
    let mut out = vec![0.0; n];
    let mut state = InterArrivalState::empty();
    for k in (0..n).rev() {
        let y = next_gap_inverse(&state, draws[k], model, num)?;
        out[k] = y;
        state.prepend_in_place(y)?;
    }
    Ok(out)
}

pub fn backward_sample(
    model: &ModelParams,
    k: usize,
    tol: f64,
    rng: &mut StreamRng,
    depth_cap: usize,
    num: &Numerics,
) -> Result<BackwardSample> {
    let (_, beta) = affine_params(model)?;
    if k == 0 {
        return Err(HawkesError::Domain("prefix length must be >= 1".into()));
    }
    if depth_cap < k {
        return Err(HawkesError::Domain(format!(
            "depth cap {depth_cap} below prefix length {k}"
        )));
    }
    let mut draws: Vec<f64> = Vec::new();
    let mut extend = |draws: &mut Vec<f64>, n: usize| {
        while draws.len() < n {
            draws.push(rng.exp1());
        }
    };

    if beta == 0.0 {
        // no dependence on the past: exact at depth K
        extend(&mut draws, k);
        let coords = coordinates(&draws, model, num)?;
        return Ok(BackwardSample {
            prefix: coords.clone(),
            depth_used: k,
            converged: true,
            residual: 0.0,
            monotone_violations: 0,
            trace: vec![(k, coords.clone())],
            coords,
            draws,
        });
    }

    let mut n = k.max(MIN_DEPTH).min(depth_cap);
    extend(&mut draws, n);
    let mut prev = coordinates(&draws[..n], model, num)?;
    let mut trace = vec![(n, prev[..k].to_vec())];
    let mut violations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    while n < depth_cap {
        let deeper = (2 * n).min(depth_cap);
        extend(&mut draws, deeper);
        let cur = coordinates(&draws[..deeper], model, num)?;
        violations += (0..n).filter(|&i| cur[i] > prev[i] + 10.0 * num.tol).count();
        residual = (0..k).map(|i| prev[i] - cur[i]).fold(0.0, f64::max);
        trace.push((deeper, cur[..k].to_vec()));
        n = deeper;
        prev = cur;
        if residual < tol {
            converged = true;
            break;
        }
    }
    draws.truncate(n);
    Ok(BackwardSample {
        prefix: prev[..k].to_vec(),
        depth_used: n,
        converged,
        residual,
        monotone_violations: violations,
        coords: prev,
        draws,
        trace,
    })
}

/// `I = Σ_{k>=1} h(Y_2 + ... + Y_k)` over the prefix, and an estimate of the
/// rest. With `S_i = (1/ν) Σ_{j=2}^i (E_j - αβ)` and `R_i` the smaller of
/// `S_i^+` and `Y_2 + ... + Y_i`, the rest is `Σ_{K<i<=n} h(R_i)` plus
/// `ν/(1-αβ) · H̄(R_n)` past the depth.
pub fn stationary_intensity(sample: &BackwardSample, model: &ModelParams) -> Result<(f64, f64)> {
    let (nu, beta) = affine_params(model)?;
    let kernel = &model.kernel;
    let alpha = kernel.alpha();
    let kk = sample.prefix.len();
    let mut i_est = 0.0;
    let mut dist = 0.0;
    for (idx, y) in sample.prefix.iter().enumerate() {
        if idx > 0 {
            dist += y;
        }
        i_est += kernel.h(dist);
    }
    let mut walk = 0.0;
    let mut span = 0.0;
    let mut reach = 0.0;
    let mut tail = 0.0;
    for (idx, (e, y)) in sample.draws.iter().zip(&sample.coords).enumerate().skip(1) {
        walk += (e - alpha * beta) / nu;
        span += y;
        reach = walk.max(0.0).min(span);
        if idx >= kk {
            tail += kernel.h(reach);
        }
    }
    tail += nu / (1.0 - alpha * beta) * kernel.tail_mass(reach);
    Ok((i_est, tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MemoryKernel;
    use crate::stats;
    use approx::assert_abs_diff_eq;

    fn affine(nu: f64, beta: f64, alpha: f64) -> ModelParams {
        ModelParams::new(
            MemoryKernel::exponential(alpha).unwrap(),
            Activation::affine(nu, beta).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn independent_case_is_exact() {
        let m = affine(2.0, 0.0, 1.0);
        let mut rng = StreamRng::new(1);
        let s = backward_sample(&m, 5, 1e-9, &mut rng, 1000, &Numerics::default()).unwrap();
        assert!(s.converged);
        assert_eq!(s.depth_used, 5);
        let mut check = StreamRng::new(1);
        for y in &s.prefix {
            assert_abs_diff_eq!(*y, check.exp1() / 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn coordinates_shrink_with_depth() {
        let m = affine(1.0, 0.8, 0.5);
        for seed in 0..20 {
            let mut rng = StreamRng::new(seed);
            let s = backward_sample(&m, 4, 1e-9, &mut rng, 4096, &Numerics::default()).unwrap();
            assert!(s.converged);
            assert!(s.residual < 1e-9);
            assert_eq!(s.monotone_violations, 0);
            for w in s.trace.windows(2) {
                for (a, b) in w[0].1.iter().zip(&w[1].1) {
                    assert!(b <= &(a + 1e-9));
                }
            }
        }
    }

    #[test]
    fn rejects_unstable_or_nonlinear() {
        let mut rng = StreamRng::new(0);
        let num = Numerics::default();
        assert!(matches!(
            backward_sample(&affine(1.0, 1.0, 1.0), 1, 1e-9, &mut rng, 100, &num),
            Err(HawkesError::Unsupported(_))
        ));
        let p = ModelParams::new(
            MemoryKernel::exponential(1.0).unwrap(),
            Activation::polynomial(1.0, 1.0, 0.5).unwrap(),
        )
        .unwrap();
        assert!(backward_sample(&p, 1, 1e-9, &mut rng, 100, &num).is_err());
    }

    #[test]
    fn mean_first_coordinate() {
        let m = affine(1.0, 0.5, 1.0);
        let ys: Vec<f64> = (0..3000)
            .map(|r| {
                let mut rng = StreamRng::for_replica(99, r);
                backward_sample(&m, 1, 1e-9, &mut rng, 1 << 14, &Numerics::default())
                    .unwrap()
                    .prefix[0]
            })
            .collect();
        let (mean, se) = stats::mean_se(&ys).unwrap();
        assert!((mean - 0.5).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn intensity_independent_case_matches_series() {
        // β = 0: I = Σ_k exp(-(E_2 + ... + E_k)/ν)
        let m = affine(1.0, 0.0, 1.0);
        let k = 60;
        let mut ours = Vec::new();
        let mut direct = Vec::new();
        for r in 0..4000 {
            let mut rng = StreamRng::for_replica(5, r);
            let s = backward_sample(&m, k, 1e-9, &mut rng, 1000, &Numerics::default()).unwrap();
            let (i, tail) = stationary_intensity(&s, &m).unwrap();
            assert!(tail < 1e-6);
            ours.push(i);
            let mut other = StreamRng::for_replica(6, r);
            let mut acc = 1.0;
            let mut d = 0.0;
            for _ in 1..k {
                d += other.exp1();
                acc += (-d).exp();
            }
            direct.push(acc);
        }
        let (m1, s1) = stats::mean_se(&ours).unwrap();
        let (m2, s2) = stats::mean_se(&direct).unwrap();
        assert!((m1 - m2).abs() < 3.0 * (s1 * s1 + s2 * s2).sqrt());
    }

    #[test]
    fn intensity_tail_covers_longer_prefix() {
        let m = affine(1.0, 0.5, 1.0);
        let mut fails = 0;
        for r in 0..200 {
            let short = backward_sample(
                &m,
                2,
                1e-9,
                &mut StreamRng::for_replica(8, r),
                4096,
                &Numerics::default(),
            )
            .unwrap();
            let long = backward_sample(
                &m,
                64,
                1e-9,
                &mut StreamRng::for_replica(8, r),
                4096,
                &Numerics::default(),
            )
            .unwrap();
            let (i_s, t_s) = stationary_intensity(&short, &m).unwrap();
            let (i_l, _) = stationary_intensity(&long, &m).unwrap();
            if i_s + t_s < i_l {
                fails += 1;
            }
        }
        assert!(fails <= 10, "{fails}");
    }

    #[test]
    fn intensity_mean_stable_in_prefix_length() {
        let m = affine(1.0, 0.5, 1.0);
        let run = |k: usize| {
            let mut is = Vec::new();
            let mut ts = Vec::new();
            for r in 0..1000 {
                let s = backward_sample(
                    &m,
                    k,
                    1e-9,
                    &mut StreamRng::for_replica(3, r),
                    4096,
                    &Numerics::default(),
                )
                .unwrap();
                let (i, t) = stationary_intensity(&s, &m).unwrap();
                is.push(i);
                ts.push(t);
            }
            (is.iter().sum::<f64>() / 1000.0, ts.iter().sum::<f64>() / 1000.0)
        };
        let (i8, t8) = run(8);
        let (i16, _) = run(16);
        assert!((i16 - i8).abs() < 2.0 * t8, "{i8} {i16} {t8}");
    }
}
