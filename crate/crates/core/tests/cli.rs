use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hausdorff")).args(args).output().unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn manifest(path: &Path) -> serde_json::Value {
    let mut m = path.as_os_str().to_owned();
    m.push(".manifest.json");
    serde_json::from_str(&std::fs::read_to_string(m).unwrap()).unwrap()
}

fn error_line(out: &Output) -> serde_json::Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "stderr: {text}");
    serde_json::from_str(lines[0]).unwrap()
}

#[test]
fn calderon_symbol_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sym.csv");
    let o = run(&[
        "symbol", "--preset", "calderon", "--s-min", "-20", "--s-max", "20", "--s-count", "4001", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 4001);
    let row = rows.iter().find(|r| r[0] == 0.0).unwrap();
    assert!((row[1] - 4.0).abs() < 1e-6);
    let m = manifest(&out);
    assert_eq!(m["command"], "symbol");
    assert!(m["warnings"].is_array());
    assert!(m["timing_ms"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["config"]["symbol"]["s"]["s_count"], 4001);
}

#[test]
fn cesaro_square_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k2.csv");
    let o = run(&["power", "--preset", "cesaro", "--l", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out);
    let target = (-1.0f64).exp();
    let k = rows.partition_point(|r| r[0] < target);
    let (a, b) = (&rows[k - 1], &rows[k]);
    let v = a[1] + (b[1] - a[1]) * (target.ln() - a[0].ln()) / (b[0].ln() - a[0].ln());
    assert!((v - 1.0).abs() < 1e-3, "K2(1/e) = {v}");
    assert!(manifest(&out)["command"] == "power");
}

#[test]
fn unknown_preset_is_a_usage_error() {
    let o = run(&["symbol", "--preset", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_line(&o);
    assert_eq!(e["message"], "unknown preset: nosuch");
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_flags_exit_two() {
    let o = run(&["symbol", "--preset", "calderon", "--s-count", "many"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["error"], "usage");
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn numerical_precondition_exits_one() {
    let o = run(&["fracpow", "--preset", "cesaro", "--power", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(error_line(&o)["error"].is_string());
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("model.json");
    std::fs::write(&cfg, "{ not json").unwrap();
    let o = run(&["symbol", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}.csv"));
        let o = run(&[
            "apply", "--preset", "boyd", "--gaussian", "2,0.3", "--l", "2", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        bodies.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    let a = run(&["symbol", "--preset", "cesaro", "--s-count", "101"]);
    let b = run(&["symbol", "--preset", "cesaro", "--s-count", "101"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn stdout_mode_puts_manifest_on_stderr() {
    let o = run(&["spectrum", "--preset", "calderon"]);
    assert!(o.status.success());
    let m = error_line(&o);
    assert_eq!(m["command"], "spectrum");
    let hull = m["result"]["hull"].as_array().unwrap();
    assert_eq!(hull[0].as_f64(), Some(0.0));
    assert!((hull[1].as_f64().unwrap() - 4.0).abs() < 1e-6);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("s,re,im\n"));
}

#[test]
fn matrix_symbol_writes_one_file_per_entry() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("phi.csv");
    let o = run(&[
        "matrix-symbol", "--preset", "reflected-cesaro", "--s-min", "-2", "--s-max", "2", "--s-count", "5", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files = manifest(&out)["result"]["files"].as_array().unwrap().len();
    assert_eq!(files, 4);
    let p12 = read_csv(&dir.path().join("phi_1_2.csv"));
    let p21 = read_csv(&dir.path().join("phi_2_1.csv"));
    assert_eq!(p12, p21);
    assert!((p12[2][1] - 2.0).abs() < 1e-6);
    assert!(read_csv(&dir.path().join("phi_1_1.csv")).iter().all(|r| r[1].abs() <= 1e-10));
}

#[test]
fn verify_reports_and_rejects_unknown_suites() {
    let o = run(&["verify", "--suite", "specfun-reference"]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["suite"], "specfun-reference");
    assert_eq!(report["pass"], true);
    assert_eq!(run(&["verify", "--suite", "nosuch"]).status.code(), Some(2));
}
