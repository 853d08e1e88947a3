//! One runner per experiment kind. Replicas run in parallel and are written
//! in replica order.

use anyhow::{bail, Result};
use hawkes_core::expmem::{gap_mean, palm_gaps_from_z, stationary_z, transient_experiment};
use hawkes_core::history::InterArrivalState;
use hawkes_core::linear::{
    backward_sample, cesaro_diagnostic, coupling_bound_estimate, stationary_intensity, CouplingOptions,
};
use hawkes_core::model::{Activation, MemoryKernel, ModelParams};
use hawkes_core::replicas::run_replicas;
use hawkes_core::simulator::{compensator_increments, simulate_with_rng, Numerics, PathStatus, SimConfig};
use hawkes_core::stats::{self, TestResult};
use hawkes_core::validation::{self, Scale};
use serde::Serialize;
use serde_json::json;

use crate::config::{self, Experiment, ExperimentConfig};
use crate::output::{num, Output, PlotSeries};

/// Whether a validation run found failing criteria.
pub struct Ran {
    pub validation_failed: bool,
}

fn tag(r: usize, n: usize) -> String {
    if n == 1 {
        String::new()
    } else {
        format!("_r{r:03}")
    }
}

pub fn run(cfg: &ExperimentConfig, out: &mut Output) -> Result<Ran> {
    let m = &cfg.model;
    let reps = cfg.replicas;
    let seed = cfg.seed;
    let mut failed = false;
    match &cfg.experiment {
        Experiment::Simulate(p) => simulate(m, p, seed, reps, out)?,
        Experiment::StationaryLinear(p) => stationary_linear(m, p, seed, reps, out)?,
        Experiment::Cesaro(p) => cesaro(m, p, seed, reps, out)?,
        Experiment::ExpmemStationary(p) => expmem_stationary(m, p, seed, reps, out)?,
        Experiment::TransientScaling(p) => transient(m, p, seed, reps, out)?,
        Experiment::Couple(p) => couple(m, p, seed, reps, out)?,
        Experiment::Validate(p) => failed = validate(p.quick, out)?,
    }
    Ok(Ran {
        validation_failed: failed,
    })
}

#[derive(Serialize)]
struct SimulateSummary {
    replica: usize,
    n_events: usize,
    status: PathStatus,
    end_time: f64,
    mean_gap: Option<f64>,
    mean_gap_se: Option<f64>,
    increments_ks: Option<TestResult>,
    increments_lag1: Option<f64>,
}

fn simulate(m: &ModelParams, p: &config::Simulate, seed: u64, reps: usize, out: &mut Output) -> Result<()> {
    let x0 = InterArrivalState::from_gaps(p.initial_gaps.clone(), true)?;
    let mut sc = SimConfig::new(seed, p.n_events);
    sc.horizon = p.horizon;
    sc.inversion_tol = p.inversion_tol;
    sc.min_gap = p.min_gap;
    sc.validate()?;
    let runs = run_replicas(seed, reps, |r, rng| {
        let path = simulate_with_rng(&x0, m, &sc, rng)?;
        let inc = compensator_increments(&path, &x0, m, sc.inversion_tol)?;
        let (mean, se) = match stats::mean_se(&path.gaps) {
            Ok((a, b)) => (Some(a), Some(b)),
            Err(_) => (None, None),
        };
        let summary = SimulateSummary {
            replica: r,
            n_events: path.len(),
            status: path.status,
            end_time: path.times.last().copied().unwrap_or(0.0),
            mean_gap: mean,
            mean_gap_se: se,
            increments_ks: stats::ks_one_sample(&inc, stats::exp_cdf(1.0)).ok(),
            increments_lag1: (inc.len() > 2).then(|| stats::lag1_autocorrelation(&inc)),
        };
        Ok((path, summary))
    })?;
    let mut summaries = Vec::new();
    for (r, (path, s)) in runs.into_iter().enumerate() {
        let rows = (0..path.len()).map(|i| {
            vec![
                (i + 1).to_string(),
                num(path.times[i]),
                num(path.gaps[i]),
                num(path.e_used[i]),
            ]
        });
        out.csv(
            &format!("path{}.csv", tag(r, reps)),
            &[],
            &["n", "T_n", "X_n", "E_n"],
            rows,
        )?;
        summaries.push(s);
    }
    out.json(
        "report.json",
        &json!({ "experiment": "simulate", "replicas": summaries }),
    )
}

fn affine_of(m: &ModelParams) -> Result<(f64, f64)> {
    match m.activation {
        Activation::Affine { nu, beta } => Ok((nu, beta)),
        _ => bail!("this experiment needs an affine activation"),
    }
}

#[derive(Serialize)]
struct BackwardSummary {
    replica: usize,
    samples: usize,
    target_mean: f64,
    first_coordinate_mean: f64,
    first_coordinate_se: f64,
    converged: usize,
    max_residual: f64,
    monotone_violations: usize,
    intensity_mean: f64,
    tail_error_mean: f64,
}

fn stationary_linear(
    m: &ModelParams,
    p: &config::StationaryLinear,
    seed: u64,
    reps: usize,
    out: &mut Output,
) -> Result<()> {
    let (nu, beta) = affine_of(m)?;
    if p.samples < 2 {
        bail!("stationary-linear needs at least 2 samples");
    }
    let num_cfg = Numerics::default();
    let runs = run_replicas(seed, reps, |_, rng| {
        (0..p.samples)
            .map(|_| {
                let s = backward_sample(m, p.k, p.tol, rng, p.depth_cap, &num_cfg)?;
                let (i, t) = stationary_intensity(&s, m)?;
                Ok((s, i, t))
            })
            .collect::<hawkes_core::Result<Vec<_>>>()
    })?;
    let mut summaries = Vec::new();
    for (r, samples) in runs.iter().enumerate() {
        let t = tag(r, reps);
        let rows = samples.iter().enumerate().flat_map(|(j, (s, _, _))| {
            s.prefix
                .iter()
                .enumerate()
                .map(move |(k, y)| vec![j.to_string(), (k + 1).to_string(), num(*y)])
        });
        out.csv(&format!("backward{t}.csv"), &[], &["sample", "k", "Y_k"], rows)?;
        let rows = samples.iter().enumerate().map(|(j, (s, i, e))| {
            vec![
                j.to_string(),
                num(*i),
                num(*e),
                s.depth_used.to_string(),
                s.converged.to_string(),
            ]
        });
        out.csv(
            &format!("intensity{t}.csv"),
            &[],
            &["sample", "I", "tail_error", "depth", "converged"],
            rows,
        )?;
        let y1: Vec<f64> = samples.iter().map(|s| s.0.prefix[0]).collect();
        let (mean, se) = stats::mean_se(&y1)?;
        let n = samples.len() as f64;
        summaries.push(BackwardSummary {
            replica: r,
            samples: samples.len(),
            target_mean: (1.0 - m.kernel.alpha() * beta) / nu,
            first_coordinate_mean: mean,
            first_coordinate_se: se,
            converged: samples.iter().filter(|s| s.0.converged).count(),
            max_residual: samples.iter().map(|s| s.0.residual).fold(0.0, f64::max),
            monotone_violations: samples.iter().map(|s| s.0.monotone_violations).sum(),
            intensity_mean: samples.iter().map(|s| s.1).sum::<f64>() / n,
            tail_error_mean: samples.iter().map(|s| s.2).sum::<f64>() / n,
        });
    }
    out.json(
        "report.json",
        &json!({ "experiment": "stationary-linear", "replicas": summaries }),
    )
}

fn cesaro(m: &ModelParams, p: &config::Cesaro, seed: u64, reps: usize, out: &mut Output) -> Result<()> {
    let nm = Numerics::with_tol(p.inversion_tol);
    let runs = run_replicas(seed, reps, |_, rng| {
        cesaro_diagnostic(m, p.n_events, rng, &nm, p.checkpoints.as_deref())
    })?;
    for (r, rep) in runs.iter().enumerate() {
        let t = tag(r, reps);
        let pts: Vec<_> = rep.points.iter().filter(|c| c.w1_to_prev.is_some()).collect();
        out.emit_plot_data(
            &format!("cesaro_w1{t}.csv"),
            "Cesaro averages of the gap law settle: W1 distance between consecutive checkpoints",
            &PlotSeries {
                x_label: "n",
                y_label: "W1",
                points: pts.iter().map(|c| (c.n as f64, c.w1_to_prev.unwrap())).collect(),
                group: None,
                extra: vec![],
            },
        )?;
        let rows = rep.points.iter().flat_map(|c| {
            hawkes_core::linear::cesaro::QUANTILE_LEVELS
                .iter()
                .zip(&c.quantiles)
                .map(move |(p, q)| vec![c.n.to_string(), num(*p), num(*q)])
        });
        out.csv(&format!("cesaro_quantiles{t}.csv"), &[], &["n", "p", "quantile"], rows)?;
    }
    out.json("report.json", &json!({ "experiment": "cesaro", "replicas": runs }))
}

fn exp_scale(m: &ModelParams) -> Result<f64> {
    match m.kernel {
        MemoryKernel::Exponential { scale } => Ok(scale),
        _ => bail!("this experiment needs an exponential kernel"),
    }
}

#[derive(Serialize)]
struct ExpmemSummary {
    replica: usize,
    n_keep: usize,
    mean_gap: f64,
    mean_gap_batch_se: f64,
    mean_z: f64,
    halves_ks: TestResult,
    increments_ks: TestResult,
    increments_lag1: f64,
}

fn expmem_stationary(
    m: &ModelParams,
    p: &config::ExpmemStationary,
    seed: u64,
    reps: usize,
    out: &mut Output,
) -> Result<()> {
    let alpha = exp_scale(m)?;
    let act = &m.activation;
    let runs = run_replicas(seed, reps, |r, rng| {
        let run = stationary_z(act, alpha, p.n_burn, p.n_keep, rng, p.tol)?;
        let gaps = palm_gaps_from_z(&run.z, &run.e, act, alpha, p.tol)?;
        let (mean, se) = gap_mean(&gaps)?;
        let (a, b) = gaps.split_at(gaps.len() / 2);
        let s = ExpmemSummary {
            replica: r,
            n_keep: p.n_keep,
            mean_gap: mean,
            mean_gap_batch_se: se,
            mean_z: run.z.iter().sum::<f64>() / run.z.len() as f64,
            halves_ks: stats::ks_two_sample(a, b)?,
            increments_ks: stats::ks_one_sample(&run.e, stats::exp_cdf(1.0))?,
            increments_lag1: stats::lag1_autocorrelation(&run.e),
        };
        Ok((run, gaps, s))
    })?;
    let mut summaries = Vec::new();
    for (r, (run, gaps, s)) in runs.into_iter().enumerate() {
        let rows = (0..gaps.len()).map(|i| vec![i.to_string(), num(run.z[i]), num(run.e[i]), num(gaps[i])]);
        out.csv(
            &format!("z{}.csv", tag(r, reps)),
            &[],
            &["n", "Z_n", "E_n", "X_n"],
            rows,
        )?;
        summaries.push(s);
    }
    out.json(
        "report.json",
        &json!({ "experiment": "expmem-stationary", "replicas": summaries }),
    )
}

#[derive(Serialize)]
struct TransientSummary {
    replica: usize,
    gamma: f64,
    beta: f64,
    nu: f64,
    alpha: f64,
    n_events: usize,
    final_ratio: f64,
    rescaled_start: usize,
    rescaled_mean: f64,
    ks_stat: f64,
    ks_p: f64,
    count_window: f64,
    count_windows: usize,
    count_dispersion: f64,
    dispersion_p: f64,
}

const HIST_WIDTH: f64 = 0.25;
const HIST_BINS: usize = 24;

fn transient(m: &ModelParams, p: &config::TransientScaling, seed: u64, reps: usize, out: &mut Output) -> Result<()> {
    let alpha = exp_scale(m)?;
    let Activation::Polynomial { nu, beta, gamma } = m.activation else {
        bail!("transient-scaling needs a polynomial activation");
    };
    let runs = run_replicas(seed, reps, |_, rng| {
        transient_experiment(gamma, nu, beta, alpha, p.n_events, rng, p.tol)
    })?;
    let mut summaries = Vec::new();
    for (r, rep) in runs.into_iter().enumerate() {
        let t = tag(r, reps);
        let rows = (1..=rep.n_events).map(|n| {
            let ratio = rep.ratio_series[n - 1];
            // rescaled gap at index n is β^γ n^γ X_{n+1}
            let g = n
                .checked_sub(rep.rescaled_start)
                .and_then(|i| rep.rescaled_gaps.get(i))
                .map_or(String::new(), |v| num(*v));
            vec![n.to_string(), num(ratio * n as f64), num(ratio), g]
        });
        out.csv(
            &format!("transient{t}.csv"),
            &[],
            &["n", "Z_n", "ratio", "rescaled_gap"],
            rows,
        )?;
        out.emit_plot_data(
            &format!("ratio_series{t}.csv"),
            "Z_n / n tends to 1 in the explosive regime",
            &PlotSeries {
                x_label: "n",
                y_label: "Z_n/n",
                points: rep
                    .ratio_series
                    .iter()
                    .enumerate()
                    .map(|(i, v)| ((i + 1) as f64, *v))
                    .collect(),
                group: None,
                extra: vec![],
            },
        )?;
        let mut counts = [0usize; HIST_BINS];
        for g in &rep.rescaled_gaps {
            let b = (g / HIST_WIDTH).floor() as usize;
            if b < HIST_BINS {
                counts[b] += 1;
            }
        }
        let total = rep.rescaled_gaps.len() as f64;
        let lefts: Vec<f64> = (0..HIST_BINS).map(|i| i as f64 * HIST_WIDTH).collect();
        out.emit_plot_data(
            &format!("rescaled_hist{t}.csv"),
            "rescaled gaps beta^gamma n^gamma X_{n+1} against the Exp(1) density",
            &PlotSeries {
                x_label: "bin_left",
                y_label: "density",
                points: lefts
                    .iter()
                    .zip(counts)
                    .map(|(l, c)| (*l, c as f64 / (total * HIST_WIDTH)))
                    .collect(),
                group: None,
                extra: vec![(
                    "exp1_density",
                    lefts
                        .iter()
                        .map(|l| ((-l).exp() - (-(l + HIST_WIDTH)).exp()) / HIST_WIDTH)
                        .collect(),
                )],
            },
        )?;
        summaries.push(TransientSummary {
            replica: r,
            gamma: rep.gamma,
            beta: rep.beta,
            nu: rep.nu,
            alpha: rep.alpha,
            n_events: rep.n_events,
            final_ratio: rep.final_ratio,
            rescaled_start: rep.rescaled_start,
            rescaled_mean: rep.rescaled_mean,
            ks_stat: rep.ks_stat,
            ks_p: rep.ks_p,
            count_window: rep.count_window,
            count_windows: rep.count_windows,
            count_dispersion: rep.count_dispersion,
            dispersion_p: rep.dispersion_p,
        });
    }
    out.json(
        "report.json",
        &json!({ "experiment": "transient-scaling", "replicas": summaries }),
    )
}

fn couple(m: &ModelParams, p: &config::Couple, seed: u64, reps: usize, out: &mut Output) -> Result<()> {
    let z = InterArrivalState::from_gaps(p.z_gaps.clone(), true)?;
    let opts = CouplingOptions {
        walks: p.walks,
        margin: p.margin,
        ..CouplingOptions::default()
    };
    let runs = run_replicas(seed, reps, |_, rng| {
        coupling_bound_estimate(&z, m, p.trials, rng, &opts)
    })?;
    out.json("report.json", &json!({ "experiment": "couple", "replicas": runs }))
}

#[derive(Serialize)]
struct CriterionLine<'a> {
    id: u8,
    name: &'a str,
    passed: bool,
    detail: &'a str,
}

/// Runs the acceptance checks, printing one line each. Returns whether any failed.
pub fn validate(quick: bool, out: &mut Output) -> Result<bool> {
    let scale = if quick { Scale::QUICK } else { Scale::FULL };
    let mut outcomes = Vec::new();
    for (id, _, _) in validation::CRITERIA {
        let o = validation::run_one(id, scale)?;
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} [{:>2}] {} ({:.1}s): {}", o.id, o.name, o.seconds, o.detail);
        outcomes.push(o);
    }
    let lines: Vec<_> = outcomes
        .iter()
        .map(|o| CriterionLine {
            id: o.id,
            name: &o.name,
            passed: o.passed,
            detail: &o.detail,
        })
        .collect();
    let failed = outcomes.iter().any(|o| !o.passed);
    out.json(
        "report.json",
        &json!({ "experiment": "validate", "quick": quick, "passed": !failed, "criteria": lines }),
    )?;
    Ok(failed)
}
