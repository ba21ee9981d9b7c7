use std::path::Path;
use std::process::{Command, Output};

fn bouss(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bouss")).args(args).current_dir(dir).output().unwrap()
}

fn write_params(dir: &Path, name: &str, omega: f64) -> String {
    let text = format!(r#"{{"a": 2, "b": 1, "c": 1, "d": 1, "p": 1, "omega": {omega}, "nmax": 64}}"#);
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

#[test]
fn regime_reports_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_params(dir.path(), "p0.json", 3.0);
    let out = bouss(&["regime", "--params", &p, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/regime.json")).unwrap()).unwrap();
    let r = &json["report"];
    assert_eq!(
        (r["omega0_sq"].as_f64(), r["omega1_sq"].as_f64(), r["omega2_sq"].as_f64()),
        (Some(2.0), Some(6.0), Some(3.0))
    );
    assert_eq!(json["seed"], 0);
    let csv = std::fs::read_to_string(dir.path().join("o/regime.csv")).unwrap();
    assert_eq!(csv.lines().count(), 66);
}

#[test]
fn spectrum_has_one_row_per_mode() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_params(dir.path(), "p0.json", 3.0);
    let out = bouss(&["spectrum", "--params", &p, "--nmax", "64", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(dir.path().join("o/spectrum.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[1], "lambda1_re");
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 64);
    assert_eq!(&rows[0][0], "1");
    let l1: f64 = rows[0][1].parse().unwrap();
    assert!((l1 + 3.9155).abs() < 1e-3, "{l1}");
    assert_eq!(&rows[0][19], "central");
}

#[test]
fn symbol_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = bouss(&["symbol", "--nmax", "8", "--out", "."], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("symbol.csv")).unwrap();
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    assert!((first[1].parse::<f64>().unwrap() - 3.9155).abs() < 1e-3);
}

#[test]
fn bad_regime_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_params(dir.path(), "bad.json", 2.0);
    let out = bouss(&["verify", "--params", &p], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let payload: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(payload["error"], "RegimeError");
    assert_eq!(payload["module"], "params");
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bouss(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(bouss(&["spectrum", "--nmax", "many"], dir.path()).status.code(), Some(1));
    assert_eq!(bouss(&["regime", "--params", "missing.json"], dir.path()).status.code(), Some(1));
    std::fs::write(dir.path().join("extra.json"), r#"{"a":2,"b":1,"c":1,"d":1,"p":1,"omega":3,"nmax":4,"e":1}"#)
        .unwrap();
    assert_eq!(bouss(&["regime", "--params", "extra.json"], dir.path()).status.code(), Some(2));
    let threads = Command::new(env!("CARGO_BIN_EXE_bouss"))
        .args(["symbol", "--nmax", "4"])
        .current_dir(dir.path())
        .env("BOUSS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // An amplitude far above the initial-data threshold.
    let out = bouss(&["evolve", "--amp", "1", "--y1", "0.01", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let payload: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(payload["error"], "FixedPointError");
}

#[test]
fn evolve_writes_traces_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_bouss"))
        .args(["evolve", "--y1", "0.02", "--dt", "1e-3", "--dump-y", "0.01", "--out", "o"])
        .current_dir(dir.path())
        .env("BOUSS_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let energy = std::fs::read_to_string(dir.path().join("o/energy.csv")).unwrap();
    assert_eq!(energy.lines().next().unwrap(), "y,e0,e1,e,drift");
    assert_eq!(energy.lines().count(), 22);
    let traj = std::fs::read_to_string(dir.path().join("o/trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 22);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/trajectory.json")).unwrap()).unwrap();
    assert_eq!(json["dumps"].as_array().unwrap().len(), 1);
    assert!((json["dumps"][0]["y"].as_f64().unwrap() - 0.01).abs() < 1e-12);
    assert_eq!(json["dumps"][0]["state"]["nmax"], 16);
    assert!(json["meta"]["drift"].as_f64().unwrap() < 1e-5);
    assert_eq!(json["config"]["k"], 2);
}

#[test]
fn dump_outside_span_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bouss(&["evolve", "--y1", "0.01", "--dump-y", "5", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}
