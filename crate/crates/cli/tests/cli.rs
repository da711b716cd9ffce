use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(task: &str, config: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{task}.json"));
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_affine-mixer"))
        .arg(task)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn error_record(out: &Output) -> Value {
    assert!(!out.status.success());
    let line = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(line.trim()).unwrap_or_else(|e| panic!("stderr {line:?} is not JSON: {e}"))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const FAIR_1D: &str = r#"{"k": 1, "support": [[0], [1]], "probs": [0.5, 0.5]}"#;

#[test]
fn classify_roots_of_integer() {
    let dir = TempDir::new().unwrap();
    let out = run("classify", r#"{"matrix": [[0, 1], [2, 0]]}"#, dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&dir.path().join("out/classify.json"));
    assert_eq!(r["regime"], "RootsOfIntegerExpanding");
    assert_eq!(r["common_power"], 2);
    let factors = r["profile"]["factors"].as_array().unwrap();
    assert_eq!(factors.len(), 1);
    assert_eq!(factors[0]["root_order"], serde_json::json!([2, "2"]));
}

#[test]
fn classify_singular_fails_with_record() {
    let dir = TempDir::new().unwrap();
    let out = run("classify", r#"{"matrix": [[1, 2], [2, 4]]}"#, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    let rec = error_record(&out);
    assert_eq!(rec["error"], "SingularMatrix");
    assert!(!dir.path().join("out/classify.json").exists());
}

#[test]
fn classify_reports_admissibility() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"matrix": [[0, 1], [2, 0]],
        "increments": {"k": 2, "support": [[0, 0], [1, 0]], "probs": [0.5, 0.5]},
        "p": [2, 3]}"#;
    let out = run("classify", cfg, dir.path(), &[]);
    assert!(out.status.success());
    let r = read_json(&dir.path().join("out/classify.json"));
    let adm = r["admissibility"].as_array().unwrap();
    assert_eq!(adm[0]["admissible"], false);
    assert!(adm[0]["reason"].as_str().unwrap().contains("det A"));
    assert_eq!(adm[1]["admissible"], true);
}

#[test]
fn evolve_checkpoint() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(r#"{{"matrix": [[2]], "increments": {FAIR_1D}, "p": [3], "n": 2}}"#);
    let out = run("evolve", &cfg, dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/distribution_p3.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,probability"));
    let probs: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    for (got, want) in probs.iter().zip([0.5, 0.25, 0.25]) {
        assert!((got - want).abs() < 1e-12);
    }
    let summary = read_json(&dir.path().join("out/evolve.json"));
    let tv = summary[0]["tv"].as_f64().unwrap();
    assert!((tv - 1.0 / 6.0).abs() < 1e-12);
    let traj = fs::read_to_string(dir.path().join("out/tv_p3.csv")).unwrap();
    assert_eq!(traj.lines().count(), 4);
}

#[test]
fn replay_is_byte_identical() {
    let cfg = format!(
        r#"{{"matrix": [[2]], "increments": {FAIR_1D}, "p": [11, 13], "n": 6, "trials": 500}}"#
    );
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        assert!(run("evolve", &cfg, d.path(), &["--seed", "42"]).status.success());
    }
    for name in ["empirical_p11.csv", "empirical_p13.csv", "distribution_p13.csv", "evolve.json"] {
        let x = fs::read(a.path().join("out").join(name)).unwrap();
        let y = fs::read(b.path().join("out").join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
    let c = TempDir::new().unwrap();
    assert!(run("evolve", &cfg, c.path(), &["--seed", "43"]).status.success());
    assert_ne!(
        fs::read(a.path().join("out/empirical_p11.csv")).unwrap(),
        fs::read(c.path().join("out/empirical_p11.csv")).unwrap()
    );
}

#[test]
fn sweep_rows_and_fits() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(r#"{{"matrix": [[1]], "increments": {FAIR_1D}, "p": [2, 5, 7, 9]}}"#);
    let out = run("mixing-sweep", &cfg, dir.path(), &["--eps", "0.25"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p,regime,n_mix,ln_p,ln_p_lnln_p,p_sq,admissible,reason"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 4);
    // det A = det B = 1, so every modulus is admissible
    let n: Vec<u64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(n[1] < n[2] && n[2] < n[3], "{n:?}");
    let fits = read_json(&dir.path().join("out/fits.json"));
    assert_eq!(fits["fits"].as_array().unwrap().len(), 4);
}

#[test]
fn sweep_marks_inadmissible_modulus() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"matrix": [[1]], "increments": {"k": 1, "support": [[0], [2]], "probs": [0.5, 0.5]},
        "p": [2, 3, 5]}"#;
    let out = run("mixing-sweep", cfg, dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    let first: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[0], "2");
    assert_eq!(first[2], "");
    assert_eq!(first[6], "false");
    assert!(first[7].contains("det B"), "{first:?}");
    // two admissible rows leave too few points for a fit; recorded, not fatal
    let fits = read_json(&dir.path().join("out/fits.json"));
    assert_eq!(fits["fits"][0]["error"], "InsufficientData");
}

#[test]
fn sweep_without_admissible_modulus_is_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"matrix": [[2]], "increments": {"k": 1, "support": [[0], [1]], "probs": [0.5, 0.5]},
        "p": [2, 4]}"#;
    let rec = error_record(&run("mixing-sweep", cfg, dir.path(), &[]));
    assert_eq!(rec["error"], "ConfigInvalid");
}

#[test]
fn schema_violations_are_config_errors() {
    let dir = TempDir::new().unwrap();
    for cfg in [
        r#"{"matrix": [[1]], "bogus": 1}"#,
        r#"{"matrix": [[1, 2]]}"#,
        r#"not json"#,
        r#"{"task": "evolve", "matrix": [[1]]}"#,
    ] {
        let rec = error_record(&run("classify", cfg, dir.path(), &[]));
        assert_eq!(rec["error"], "ConfigInvalid", "{cfg}");
    }
    let cfg = format!(r#"{{"matrix": [[2]], "increments": {FAIR_1D}, "p": [3]}}"#);
    assert_eq!(error_record(&run("evolve", &cfg, dir.path(), &[]))["error"], "ConfigInvalid");
}

#[test]
fn state_cap_from_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(r#"{{"matrix": [[2]], "increments": {FAIR_1D}, "p": [101], "n": 3}}"#);
    let path = dir.path().join("cfg.json");
    fs::write(&path, cfg).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_affine-mixer"))
        .args(["evolve", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .env("AFFINE_MIXER_STATE_CAP", "100")
        .output()
        .unwrap();
    assert_eq!(error_record(&out)["error"], "StateSpaceTooLarge");
}

#[test]
fn bounds_table() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"matrix": [[0, -1], [1, 0]],
        "increments": {"k": 2, "support": [[0, 0], [1, 0]], "probs": [0.5, 0.5]},
        "p": [11], "n": 30, "certificate": {"kind": "gamma"}}"#;
    let out = run("bounds", cfg, dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/bounds_p11.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,tv,upper,lower_best,alpha_witness,certificate"));
    let mut count = 0;
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        let tv: f64 = f[1].parse().unwrap();
        let upper: f64 = f[2].parse().unwrap();
        let lower: f64 = f[3].parse().unwrap();
        let cert: f64 = f[5].parse().unwrap();
        assert!(tv * tv <= upper + 1e-9);
        assert!(lower <= tv + 1e-9 && cert <= tv + 1e-9);
        count += 1;
    }
    assert_eq!(count, 31);
}

#[test]
fn digit_census() {
    let dir = TempDir::new().unwrap();
    let out = run("digit-census", r#"{"matrix": [[2]], "p": [7, 11], "sigma": 2}"#, dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&dir.path().join("out/census.json"));
    assert_eq!(summary[0]["t"], 3);
    assert_eq!(summary[1]["t"], 4);
    assert!(summary[1]["min_alternations"].as_u64().unwrap() >= 1);
    let csv = fs::read_to_string(dir.path().join("out/census_p7.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("a,block_index,digits,alternations"));
    assert_eq!(csv.lines().count(), 1 + 6);
}

#[test]
fn verify_identities() {
    let dir = TempDir::new().unwrap();
    let out = run("verify-identities", r#"{"matrix": [[2, 1], [1, 1]], "j_max": 4}"#, dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&dir.path().join("out/identities.json"));
    assert_eq!(r["all_hold"], true);
    // two orders, e in 0..=2, j in 0..=4
    assert_eq!(r["cases"].as_array().unwrap().len(), 2 * 3 * 5);
}

#[test]
fn shipped_configs_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for (task, file) in [
        ("classify", "classify.json"),
        ("mixing-sweep", "sweep_slow.json"),
        ("bounds", "bounds_rotation.json"),
    ] {
        let dir = TempDir::new().unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_affine-mixer"))
            .arg(task)
            .arg("--config")
            .arg(root.join(file))
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "{file}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
