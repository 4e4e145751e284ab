use std::path::{Path, PathBuf};
use std::process::{Command as Proc, Output};

use serde_json::Value;

use cfactor::cli::{Envelope, Report};

const BIN: &str = env!("CARGO_BIN_EXE_cfactor");

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Proc::new(BIN).args(args).env("CFACTOR_WORKERS", "1").output().unwrap()
}

fn run_config(dir: &Path, json: &str, extra: &[&str]) -> Output {
    let cfg = write_config(dir, "run.json", json);
    let mut args = vec!["--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_of(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr carries a JSON error");
    v["error"].clone()
}

const GAUSS: &str = r#""family": {"id": "gauss_loc", "params": {"sigma0": 1.0}}, "factor": {"kind": "location"}"#;

#[test]
fn headline_calibration_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{"command": "calibrate", {GAUSS}, "true_value": [0.0], "n": 1, "delta": 0.683, "seed": 5}}"#);
    let v = stdout_json(&run_config(dir.path(), &cfg, &["--trials", "20000"]));
    let r = &v["report"];
    assert_eq!(r["trials"], 20000);
    let cov = r["coverage"].as_f64().unwrap();
    assert!((cov - 0.683).abs() < 4.0 * r["std_error"].as_f64().unwrap(), "{cov}");
    assert_eq!(r["verdict"], "pass");
    assert_eq!(v["metadata"]["command"], "calibrate");
}

#[test]
fn bad_delta_exits_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let cfg = format!(r#"{{"command": "interval", {GAUSS}, "sample": [0.0], "delta": 1.5}}"#);
    let out = run_config(dir.path(), &cfg, &["--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_of(&out);
    assert_eq!(e["kind"], "validation");
    assert_eq!(e["field"], "delta");
    assert!(out.stdout.is_empty());
    assert!(!out_path.exists());
}

#[test]
fn flat_exponential_exits_three_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let cfg = r#"{"command": "assign", "family": {"id": "exp_scale"},
        "factor": {"kind": "custom", "q": 0.0, "r": 0.0}, "sample": [1.0]}"#;
    let out = run_config(dir.path(), cfg, &["--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(error_of(&out)["kind"], "improper_posterior");
    assert!(!out_path.exists());
    assert!(!out_path.with_extension("csv").exists());
    // nothing but the target files could have been left behind
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = run_config(dir.path(), &format!(r#"{{"command": "assign", {GAUSS}, "sampel": [1]}}"#), &[]);
    assert_eq!(unknown.status.code(), Some(2));
    assert_eq!(error_of(&unknown)["field"], "config");

    let clash = run_config(dir.path(), &format!(r#"{{"command": "assign", {GAUSS}, "sample": [1]}}"#), &["interval"]);
    assert_eq!(clash.status.code(), Some(2));
    assert_eq!(error_of(&clash)["field"], "command");

    let no_table = run_config(
        dir.path(),
        &format!(r#"{{"command": "residual", {GAUSS}, "sample": [0.0]}}"#),
        &["--format", "csv"],
    );
    assert_eq!(no_table.status.code(), Some(2));
    assert_eq!(error_of(&no_table)["field"], "format");

    let missing = run(&["assign", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn worker_variable_is_honoured_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "r.json", &format!(r#"{{"command": "residual", {GAUSS}, "sample": [0.0]}}"#));
    let two = Proc::new(BIN)
        .args(["--config", cfg.to_str().unwrap()])
        .env("CFACTOR_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&two)["metadata"]["workers"], 2);
    let bad = Proc::new(BIN)
        .args(["--config", cfg.to_str().unwrap()])
        .env("CFACTOR_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(error_of(&bad)["field"], "CFACTOR_WORKERS");
}

/// One config per command, small enough to run quickly.
fn configs() -> Vec<(&'static str, String)> {
    vec![
        ("assign", format!(r#"{{"command": "assign", {GAUSS}, "sample": [0.2, 1.1]}}"#)),
        (
            "interval",
            r#"{"command": "interval", "family": {"id": "gauss_loc_scale"}, "factor": {"kind": "location_scale"},
                "sample": [-1.0, 0.5, 2.0], "grid": {"nodes": 201}}"#
                .to_owned(),
        ),
        (
            "update",
            r#"{"command": "update", "family": {"id": "cauchy_loc"}, "factor": {"kind": "location"}, "sample": [0.4, -1.2, 2.0]}"#
                .to_owned(),
        ),
        (
            "calibrate",
            r#"{"command": "calibrate", "family": {"id": "exp_scale"}, "factor": {"kind": "scale"},
                "sweep": [[0.5], [2.0]], "trials": 2000, "seed": 3}"#
                .to_owned(),
        ),
        (
            "factor-scan",
            r#"{"command": "factor-scan", "family": {"id": "gauss_loc_scale"}, "sample": [-1.0, 0.5, 2.0], "grid": {"nodes": 201}}"#
                .to_owned(),
        ),
        (
            "asymptotics",
            r#"{"command": "asymptotics", "family": {"id": "poisson"}, "true_value": [2.0],
                "n_list": [1, 5], "trials": 2000, "seed": 4}"#
                .to_owned(),
        ),
        ("residual", format!(r#"{{"command": "residual", {GAUSS}, "sample": [-2.0, 0.0, 3.0]}}"#)),
    ]
}

#[test]
fn reports_round_trip_through_their_types() {
    let dir = tempfile::tempdir().unwrap();
    for (name, cfg) in configs() {
        let out = run_config(dir.path(), &cfg, &[]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        let (env, report) = Envelope::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(env.metadata.command.name(), name);
        let again = match &report {
            Report::Posterior(r) => serde_json::to_value(r),
            Report::Coverage(r) => serde_json::to_value(r),
            Report::Scan(r) => serde_json::to_value(r),
            Report::Asymptotics(r) => serde_json::to_value(r),
            Report::Residual(r) => serde_json::to_value(r),
            Report::SelfCheck(r) => serde_json::to_value(r),
        }
        .unwrap();
        assert_eq!(again, env.report, "{name}");
    }
}

#[test]
fn same_config_same_report() {
    let dir = tempfile::tempdir().unwrap();
    for (name, cfg) in configs() {
        let a = stdout_json(&run_config(dir.path(), &cfg, &[]));
        let b = stdout_json(&run_config(dir.path(), &cfg, &[]));
        assert_eq!(
            serde_json::to_string(&a["report"]).unwrap(),
            serde_json::to_string(&b["report"]).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn worker_count_leaves_reports_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let (_, cfg) = &configs()[3];
    let path = write_config(dir.path(), "c.json", cfg);
    let report = |workers: &str| {
        let out = Proc::new(BIN)
            .args(["--config", path.to_str().unwrap()])
            .env("CFACTOR_WORKERS", workers)
            .output()
            .unwrap();
        serde_json::to_string(&stdout_json(&out)["report"]).unwrap()
    };
    assert_eq!(report("1"), report("3"));
}

fn csv_header(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout).lines().next().unwrap().to_owned()
}

#[test]
fn csv_tables() {
    let dir = tempfile::tempdir().unwrap();
    let tables = [
        ("assign", "mu,density"),
        ("interval", "parameter,lo,hi,level"),
        ("factor-scan", "q,r=0,r=1,r=2"),
        ("asymptotics", "n,coverage,std_error,improper_count,trials,hits"),
    ];
    let configs = configs();
    for (name, header) in tables {
        let cfg = &configs.iter().find(|(n, _)| *n == name).unwrap().1;
        let out = run_config(dir.path(), cfg, &["--format", "csv"]);
        assert_eq!(csv_header(&out), header, "{name}");
    }
    // sweep flag overrides the config and yields one row per point
    let cfg = &configs[3].1;
    let out = run_config(dir.path(), cfg, &["--format", "csv", "--sweep", "0.5;1;4", "--trials", "1000"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4, "{text}");
}

#[test]
fn out_writes_json_and_csv_side_by_side() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("scan.json");
    let cfg = &configs()[4].1;
    let out = run_config(dir.path(), cfg, &["--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(json["report"]["q"], serde_json::json!([-1.0, 0.0, 1.0]));
    let csv = std::fs::read_to_string(out_path.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{"command": "assign", {GAUSS}, "sample": [0.0], "grid": {{"nodes": 101}}}}"#);
    let v = stdout_json(&run_config(dir.path(), &cfg, &["--grid-points", "301"]));
    assert_eq!(v["report"]["nodes"][0].as_array().unwrap().len(), 301);
    let cal = &configs()[3].1;
    let a = stdout_json(&run_config(dir.path(), cal, &["--seed", "10"]));
    assert_eq!(a["report"]["seed"], 10);
}
