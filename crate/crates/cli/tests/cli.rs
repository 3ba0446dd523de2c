use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmf")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SWEEP: &str = r#"{
    "kind": "noise_sweep",
    "template": { "kind": "gaussian", "a": 0.02 },
    "omega_max": 150,
    "window": [0, 1],
    "tau0": 0.4,
    "m": 20,
    "trials": 50,
    "c_grid": [0, 0.5],
    "master_seed": 3
}"#;

#[test]
fn sweep_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep.json", SWEEP);
    let out = dir.path().join("run");
    let o = cmf(&["sweep", "--config", &config, "--trials", "12", "--seed", "99", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary[0]["c"], 0.0);
    assert_eq!(summary[0]["success_rate"], 1.0);

    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("c,trial,tau_hat,err,success,stream_seed\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 12);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 99);
    assert_eq!(manifest["trials"], 12);
    assert_eq!(manifest["kind"], "noise_sweep");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep.json", SWEEP);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = cmf(&["sweep", "--config", &config, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
    }
    for f in ["sweep.csv", "sweep_summary.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn template_reports_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "t.json",
        r#"{"template": {"kind": "flat", "level": 2, "support": [-50, 50]}, "omega_max": 100}"#,
    );
    let out = dir.path().join("t");
    let o = cmf(&["template", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let mu2 = report["metrics"]["mu2"].as_f64().unwrap();
    assert!((mu2 - 2.0).abs() < 1e-9);
    assert!(out.join("autocorrelation.csv").exists());
}

#[test]
fn bounds_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "b.json",
        r#"{"omega_max": 50, "window_length": 1, "m": 100, "mu1": 1, "mu2": 1, "energy": 100, "sigma_n": 0.1}"#,
    );
    let o = cmf(&["bounds", "--config", &config]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["expected_sup"]["simplified"].as_f64().unwrap() > 0.0);
    assert!(report["min_samples_noisy"].as_u64().unwrap() > 100);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write_config(dir.path(), "broken.json", "{ not json");
    assert_eq!(cmf(&["sweep", "--config", &broken]).status.code(), Some(2));

    let wrong_kind = write_config(dir.path(), "sweep.json", SWEEP);
    assert_eq!(cmf(&["tone", "--config", &wrong_kind]).status.code(), Some(2));

    let missing = dir.path().join("nope.json");
    assert_eq!(cmf(&["sweep", "--config", missing.to_str().unwrap()]).status.code(), Some(2));

    let small = write_config(
        dir.path(),
        "small.json",
        r#"{"omega_max": 1, "window_length": 1, "m": 10, "mu1": 1, "mu2": 1, "energy": 2}"#,
    );
    assert_eq!(cmf(&["bounds", "--config", &small]).status.code(), Some(2));
}

#[test]
fn degenerate_measurement_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // the spectrum lives on a sliver the single sampled frequency misses
    let config = write_config(
        dir.path(),
        "degenerate.json",
        r#"{
            "kind": "noise_sweep",
            "template": { "kind": "flat", "level": 1, "support": [0, 0.001] },
            "omega_max": 600, "window": [0, 1], "tau0": 0.4,
            "m": 1, "trials": 1, "c_grid": [0], "success_radius": 0.01, "alpha2": 0.01
        }"#,
    );
    let out = dir.path().join("d");
    let o = cmf(&["sweep", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
