use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hawkes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hawkes"))
        .args(args)
        .env_remove("HAWKES_OUT")
        .output()
        .expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p
}

/// Every file in `dir` with its bytes, sorted by name.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn run_into(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    hawkes(&args)
}

#[test]
fn poisson_path_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("simulate-poisson.json");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run_into(&cfg, &a, &[]).status.success());
    assert!(run_into(&cfg, &b, &[]).status.success());
    let csv = fs::read_to_string(a.join("path.csv")).unwrap();
    let rows = csv.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, 100_000);
    assert!(csv.starts_with("# model_hash="));
    assert_eq!(snapshot(&a), snapshot(&b));
}

#[test]
fn replicas_are_reproducible_and_listed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("stationary-linear.json");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let extra = ["--replicas", "3", "--seed", "17"];
    assert!(run_into(&cfg, &a, &extra).status.success());
    assert!(run_into(&cfg, &b, &extra).status.success());
    assert_eq!(snapshot(&a), snapshot(&b));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["replicas"], 3);
    assert_eq!(m["config"]["seed"], 17);
    let files = m["files"].as_array().unwrap();
    let on_disk: Vec<String> = snapshot(&a)
        .into_iter()
        .map(|f| f.0)
        .filter(|n| n != "manifest.json")
        .collect();
    assert_eq!(files.len(), on_disk.len());
    for f in files {
        let bytes = fs::read(a.join(f["path"].as_str().unwrap())).unwrap();
        use sha2::Digest;
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(sha2::Sha256::digest(&bytes)));
    }
    assert!(a.join("backward_r002.csv").exists());
}

#[test]
fn transient_report_has_ks_p() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("t");
    assert!(run_into(&configs().join("transient-scaling.json"), &out, &[])
        .status
        .success());
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let rep = &r["replicas"][0];
    assert!(rep["ks_p"].as_f64().unwrap() > 0.01);
    let csv = fs::read_to_string(out.join("transient.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap() == "n,Z_n,ratio,rescaled_gap");
    assert!(out.join("rescaled_hist.csv").exists());
}

#[test]
fn unknown_key_is_rejected_with_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{
  "model": {
    "kernel": {"type": "exponential", "params": {"scale": 1.0}},
    "activation": {"type": "affine", "params": {"nu": 2.0, "beta": 0.0}}
  },
  "experiment": {"kind": "simulate", "n_events": 10},
  "seed": 1,
  "sed": 2
}"#,
    );
    let o = run_into(&cfg, &tmp.path().join("o"), &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("config.json:8:"), "{err}");
    assert!(err.contains("sed"), "{err}");
    assert!(!tmp.path().join("o").join("manifest.json").exists());
}

#[test]
fn missing_seed_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"model": {"kernel": {"type": "exponential", "params": {"scale": 1.0}},
 "activation": {"type": "affine", "params": {"nu": 2.0, "beta": 0.0}}},
 "experiment": {"kind": "simulate", "n_events": 10}}"#,
    );
    let o = run_into(&cfg, &tmp.path().join("o"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn env_var_sets_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let target = tmp.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_hawkes"))
        .args(["run", configs().join("couple.json").to_str().unwrap()])
        .env("HAWKES_OUT", &target)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(target.join("report.json").exists());
}

#[test]
fn quick_validation_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let o = run_into(&configs().join("validate.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 11);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
}

#[test]
fn wrong_model_for_experiment_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"model": {"kernel": {"type": "exponential", "params": {"scale": 1.0}},
 "activation": {"type": "polynomial", "params": {"nu": 1.0, "beta": 1.0, "gamma": 0.5}}},
 "experiment": {"kind": "stationary-linear", "samples": 10, "K": 2},
 "seed": 1}"#,
    );
    let o = run_into(&cfg, &tmp.path().join("o"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("affine"));
}
