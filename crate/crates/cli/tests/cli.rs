use cloak_core::material::CloakConfig;
use cloak_core::metrics::{default_probe, trace_gap};
use cloak_core::Dimension;
use std::path::Path;
use std::process::{Command, Output};

fn cloakbench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cloakbench"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn convergence_2d_recovers_quadratic_rate() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", r#"{"dimension": 2}"#);
    let out = cloakbench(
        dir.path(),
        &["convergence", "--config", "c.json", "--out", "run"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let fit = std::fs::read_to_string(dir.path().join("run_fit.csv")).unwrap();
    assert!(fit.starts_with("slope,intercept,r_squared,expected_slope,pass\n"));
    let row = &csv_rows(&fit)[0];
    let slope: f64 = row[0].parse().unwrap();
    assert!((1.9..=2.1).contains(&slope), "slope {slope}");
    assert_eq!(row[4], "true");
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.json", r#"{"dimension": 2, "rho": }"#);
    let out = cloakbench(
        dir.path(),
        &[
            "convergence",
            "--config",
            "bad.json",
            "--out",
            "run",
            "--emit-plot",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names, vec![std::ffi::OsString::from("bad.json")]);
}

#[test]
fn invalid_parameters_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.json", r#"{"omega": -1}"#);
    write(dir.path(), "b.json", r#"{"experiment": "solve"}"#);
    write(
        dir.path(),
        "c.json",
        r#"{"sweep": {"values": [0.2, 0.1, 0.3]}}"#,
    );
    write(dir.path(), "d.json", r#"{"sweep": {"values": [0.3, 0.5]}}"#);
    assert_eq!(
        cloakbench(dir.path(), &["solve", "--config", "a.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cloakbench(dir.path(), &["convergence", "--config", "b.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cloakbench(dir.path(), &["convergence", "--config", "c.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cloakbench(dir.path(), &["lemma42", "--config", "d.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cloakbench(
            dir.path(),
            &["convergence", "--config", "c.json", "--out", "missing/run"]
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 4);
}

#[test]
fn missed_rate_exits_with_fit_failure() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.json",
        r#"{"metric": "conormal", "delta": 0.5}"#,
    );
    let out = cloakbench(
        dir.path(),
        &["convergence", "--config", "c.json", "--out", "run"],
    );
    assert_eq!(out.status.code(), Some(1));
    let fit = std::fs::read_to_string(dir.path().join("run_fit.csv")).unwrap();
    assert_eq!(csv_rows(&fit)[0][4], "false");
}

#[test]
fn output_is_deterministic_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.json",
        r#"{"dimension": 3, "metric": "ntd-opnorm"}"#,
    );
    for (prefix, jobs) in [("a", "1"), ("b", "4")] {
        let out = cloakbench(
            dir.path(),
            &[
                "convergence",
                "--config",
                "c.json",
                "--out",
                prefix,
                "--jobs",
                jobs,
                "--emit-plot",
            ],
        );
        assert_eq!(out.status.code(), Some(0));
    }
    for suffix in ["_samples.csv", "_fit.csv"] {
        let a = std::fs::read(dir.path().join(format!("a{suffix}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b{suffix}"))).unwrap();
        assert_eq!(a, b, "{suffix} differs");
    }
    let a = std::fs::read_to_string(dir.path().join("a.gp")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b.gp")).unwrap();
    assert_eq!(a.replace("'a_", "'b_"), b);
}

#[test]
fn sample_rows_match_library_metrics() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.json",
        r#"{"sweep": {"from": 0.002, "to": 0.02, "count": 4}}"#,
    );
    let out = cloakbench(
        dir.path(),
        &["convergence", "--config", "c.json", "--out", "run"],
    );
    assert_eq!(out.status.code(), Some(0));
    let samples = std::fs::read_to_string(dir.path().join("run_samples.csv")).unwrap();
    let psi = default_probe(Dimension::Two, 2.0).unwrap();
    let rows = csv_rows(&samples);
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert_eq!(row.len(), 3);
        let rho: f64 = row[0].parse().unwrap();
        let value: f64 = row[1].parse().unwrap();
        let expected = trace_gap(&CloakConfig::reference(Dimension::Two, rho), &psi).unwrap();
        assert_eq!(value, expected);
    }
}

#[test]
fn every_experiment_runs_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", "{}");
    let cases = [
        ("theorem61", "_fit.csv"),
        ("lemma42", "_fit.csv"),
        ("delta-sweep", "_samples.csv"),
        ("absorption-check", "_samples.csv"),
        ("material-map", "_material.csv"),
        ("solve", "_modes.csv"),
    ];
    for (experiment, file) in cases {
        let out = cloakbench(
            dir.path(),
            &[experiment, "--config", "c.json", "--out", experiment],
        );
        assert_eq!(
            out.status.code(),
            Some(0),
            "{experiment}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(
            dir.path().join(format!("{experiment}{file}")).is_file(),
            "{experiment}"
        );
    }
}

#[test]
fn validate_does_not_write() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.json",
        r#"{"experiment": "theorem61", "out": "never"}"#,
    );
    let out = cloakbench(dir.path(), &["validate", "--config", "c.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}
