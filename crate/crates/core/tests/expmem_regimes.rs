use hawkes_core::expmem::{gap_mean, palm_gaps_from_z, stationary_z, z_step};
use hawkes_core::model::Activation;
use hawkes_core::rng::StreamRng;
use hawkes_core::stats;

const TOL: f64 = 1e-10;

#[test]
fn superlinear_chain_escapes() {
    let act = Activation::polynomial(1.0, 1.0, 1.5).unwrap();
    let mut escaped = 0;
    for seed in 0..100 {
        let mut rng = StreamRng::for_replica(31, seed);
        let mut z = 1.0;
        for _ in 0..100_000 {
            z = z_step(z, rng.exp1(), &act, 1.0, TOL).unwrap().1;
            if z > 1e3 {
                escaped += 1;
                break;
            }
        }
    }
    assert!(escaped >= 99, "{escaped}");
}

#[test]
fn affine_chain_keeps_returning() {
    let act = Activation::affine(1.0, 0.5).unwrap();
    let mut rng = StreamRng::new(32);
    let mut z = 1.0;
    let mut low_visits = 0;
    for _ in 0..100_000 {
        z = z_step(z, rng.exp1(), &act, 1.0, TOL).unwrap().1;
        if z < 10.0 {
            low_visits += 1;
        }
    }
    assert!(low_visits >= 99_000, "{low_visits}");
}

/// `Z = 1 + Σ_k exp(-(X_1 + ... + X_k)/α)` with i.i.d. `Exp(ν)` gaps.
fn perpetuity(nu: f64, alpha: f64, rng: &mut StreamRng) -> f64 {
    let mut z = 1.0;
    let mut t = 0.0;
    loop {
        t += rng.exp(nu);
        let term = (-t / alpha).exp();
        z += term;
        if term < 1e-17 {
            return z;
        }
    }
}

#[test]
fn constant_rate_matches_perpetuity() {
    let act = Activation::affine(2.0, 0.0).unwrap();
    let run = stationary_z(&act, 1.0, 1000, 40_000, &mut StreamRng::new(33), TOL).unwrap();
    let thinned: Vec<f64> = run.z.iter().step_by(20).copied().collect();
    let mut rng = StreamRng::new(34);
    let direct: Vec<f64> = (0..2000).map(|_| perpetuity(2.0, 1.0, &mut rng)).collect();
    let ks = stats::ks_two_sample(&thinned, &direct).unwrap();
    assert!(ks.p_value > 0.01, "{}", ks.p_value);
}

#[test]
fn affine_palm_mean_gap() {
    let act = Activation::affine(1.0, 0.5).unwrap();
    let run = stationary_z(&act, 1.0, 1000, 50_000, &mut StreamRng::new(35), TOL).unwrap();
    let gaps = palm_gaps_from_z(&run.z, &run.e, &act, 1.0, TOL).unwrap();
    let (mean, se) = gap_mean(&gaps).unwrap();
    assert!((mean - 0.5).abs() < 3.0 * se, "{mean} ± {se}");
}

#[test]
fn palm_law_is_stable_along_the_run() {
    let act = Activation::polynomial(1.0, 1.0, 0.5).unwrap();
    let run = stationary_z(&act, 1.0, 2000, 60_000, &mut StreamRng::new(36), TOL).unwrap();
    let gaps = palm_gaps_from_z(&run.z, &run.e, &act, 1.0, TOL).unwrap();
    let (a, b) = gaps.split_at(gaps.len() / 2);
    let a: Vec<f64> = a.iter().step_by(10).copied().collect();
    let b: Vec<f64> = b.iter().step_by(10).copied().collect();
    let ks = stats::ks_two_sample(&a, &b).unwrap();
    assert!(ks.p_value > 0.01, "{}", ks.p_value);
    let rho = stats::lag1_autocorrelation(&run.e);
    assert!(rho.abs() < 3.0 / (run.e.len() as f64).sqrt(), "{rho}");
}

#[test]
fn same_seed_same_run() {
    let act = Activation::polynomial(1.0, 1.0, 0.5).unwrap();
    let a = stationary_z(&act, 1.0, 10, 500, &mut StreamRng::new(37), TOL).unwrap();
    let b = stationary_z(&act, 1.0, 10, 500, &mut StreamRng::new(37), TOL).unwrap();
    assert_eq!(a, b);
}
