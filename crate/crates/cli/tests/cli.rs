use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn warped(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warped"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn config(dir: &Path, n: usize) -> PathBuf {
    write(
        dir,
        "run.toml",
        &format!(
            "[manifold]\ndimension = {n}\nkind = \"hyperbolic\"\n\n[grid]\nr_min = 1e-3\nr_max = 30.0\nn_points = 400\nspacing = \"geometric\"\n"
        ),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn quotients_csv_ends_near_one() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), 2);
    let out = dir.path().join("q.csv");
    let o = warped(&["quotients", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header, ["r", "Q", "I", "J", "f"]);
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[0], 30.0);
    assert!((last[2] - 1.0).abs() < 1e-3, "I(30) = {}", last[2]);
    assert!(out.with_file_name("q.csv.meta.json").exists());
}

#[test]
fn spectrum_json_reports_persson_value() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), 3);
    let out = dir.path().join("spec.json");
    let o = warped(&["spectrum", "--config", s(&cfg), "--out", s(&out), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let lambda = v["persson_lambda"].as_f64().unwrap();
    assert!((lambda - 1.0).abs() <= 1e-9, "{lambda}");
    assert_eq!(v["discreteness"]["verdict"], "NotDiscrete");
}

#[test]
fn spectrum_csv_writes_sibling_tables() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), 2);
    let out = dir.path().join("s.csv");
    let o = warped(&["spectrum", "--config", s(&cfg), "--out", s(&out), "--rmax", "20", "--cells", "400"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(&out).unwrap().starts_with("R_max,N,lambda,error_indicator\n"));
    assert!(fs::read_to_string(dir.path().join("s.potential.csv")).unwrap().starts_with("r,W\n"));
    let summary = fs::read_to_string(dir.path().join("s.summary.csv")).unwrap();
    assert!(summary.contains("persson_lambda,2.5e-1"), "{summary}");
}

#[test]
fn csv_output_is_byte_stable() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), 3);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = warped(&["curvature", "--config", s(&cfg), "--out", s(out)]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains(".tmp-"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn ball_and_graph_run_on_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), 2);
    let o = warped(&["ball", "--config", s(&cfg), "--r", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["margin"].as_f64().unwrap() > 0.0);
    assert_eq!(v["g_increasing"], true);

    let g = write(
        dir.path(),
        "graph.toml",
        "[manifold]\ndimension = 3\nkind = \"hyperbolic\"\n\n[graph]\nradius = 1.0\neps = 0.05\nquadratic = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 0.0]]\n",
    );
    let o = warped(&["graph", "--config", s(&g), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["report"]["cii_gap"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_default_family_passes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ledger.csv");
    let o = warped(&["verify", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let ledger = fs::read_to_string(&out).unwrap();
    assert!(ledger.starts_with("claim_id,manifold,status,worst_margin,location,detail\n"));
    assert!(!ledger.contains(",fail,"));
}

#[test]
fn verify_exits_one_on_claim_failure() {
    let dir = TempDir::new().unwrap();
    // asserting the centered inequality here makes the hypothesis-gated claims run
    let fam = write(
        dir.path(),
        "family.toml",
        "[[manifold]]\ndimension = 2\nkind = \"sinh_plus_bump\"\nparams = [2.0]\nknown_cii = true\n",
    );
    let o = warped(&["verify", "--family", s(&fam)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("T3-necessary,sinh_plus_bump(2)(n=2),fail"));
}

#[test]
fn validation_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.toml", "[manifold]\ndimension = 2\nkind = \"hyperbolic\"\n[grid]\nn_points = 2\n");
    assert_eq!(warped(&["curvature", "--config", s(&bad)]).status.code(), Some(2));
    let garbled = write(dir.path(), "garbled.toml", "[manifold\n");
    assert_eq!(warped(&["curvature", "--config", s(&garbled)]).status.code(), Some(2));
    let missing = dir.path().join("nope.toml");
    assert_eq!(warped(&["curvature", "--config", s(&missing)]).status.code(), Some(2));
    let cfg = config(dir.path(), 2);
    assert_eq!(warped(&["spectrum", "--config", s(&cfg), "--cells", "10"]).status.code(), Some(2));
    let power = write(dir.path(), "power.toml", "[manifold]\ndimension = 3\nkind = \"power\"\nparams = [2.0]\n");
    let o = warped(&["quotients", "--config", s(&power)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}
