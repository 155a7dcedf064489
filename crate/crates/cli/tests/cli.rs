use std::path::Path;

use resetting_lab::{run, run_suite, Suite, SuiteConfig};
use serde_json::Value;

fn lab(args: &[&str]) -> i32 {
    run(std::iter::once("resetting-lab").chain(args.iter().copied()))
}

fn lines(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn identities_suite_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("id.jsonl");
    let code = lab(&[
        "--report",
        report.to_str().unwrap(),
        "verify",
        "--suite",
        "identities",
        "--r",
        "0.5",
    ]);
    assert_eq!(code, 0);
    let v = lines(&report);
    let summary = v.last().unwrap();
    assert_eq!(summary["all_passed"], true);
    assert_eq!(summary["summary"]["failed"], 0);
    for rep in &v[..v.len() - 1] {
        assert_eq!(rep["passed"], true, "{rep}");
        assert_eq!(rep["config"]["command"]["verify"]["r"], 0.5);
    }
}

#[test]
fn invalid_rate_is_a_usage_error() {
    assert_eq!(lab(&["verify", "--suite", "all", "--r", "-1"]), 2);
}

#[test]
fn empty_or_unknown_suite_is_a_usage_error() {
    assert_eq!(lab(&["verify", "--suite", ""]), 2);
    assert_eq!(lab(&["verify", "--suite", "nonsense"]), 2);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(lab(&["verify", "--suite", "identities", "--frobnicate"]), 2);
    assert_eq!(lab(&[]), 2);
    assert_eq!(lab(&["--help"]), 0);
}

#[test]
fn scientific_notation_is_accepted() {
    assert_eq!(lab(&["verify", "--suite", "identities", "--r", "1e0"]), 0);
}

#[test]
fn pde_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.csv");
    let code = lab(&[
        "pde",
        "--problem",
        "nlbvp",
        "--r",
        "1",
        "--f",
        "expneg",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next(), Some("t,x,u"));
    let first: Vec<f64> = rows
        .next()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert_eq!(first, vec![0.0, 0.0, 1.0]);
}

#[test]
fn pde_accepts_indicator_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.csv");
    let code = lab(&[
        "pde",
        "--problem",
        "neumann",
        "--r",
        "2",
        "--f",
        "indicator:0.5,1.5",
        "--t-max",
        "0.2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        lab(&["pde", "--problem", "neumann", "--f", "indicator:2,1"]),
        2
    );
}

fn strip_timestamp(mut v: Vec<Value>) -> Vec<Value> {
    if let Some(Value::Object(m)) = v.last_mut() {
        m.remove("timestamp");
    }
    v
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("rep.jsonl");
    let args = [
        "--report",
        report.to_str().unwrap(),
        "--format",
        "json",
        "verify",
        "--suite",
        "reversal",
        "--r",
        "2",
        "--paths",
        "2000",
        "--seed",
        "11",
    ];
    lab(&args);
    let a = std::fs::read_to_string(&report).unwrap();
    lab(&args);
    let b = std::fs::read_to_string(&report).unwrap();
    let (la, lb): (Vec<&str>, Vec<&str>) = (a.lines().collect(), b.lines().collect());
    assert_eq!(la.len(), lb.len());
    assert_eq!(la[..la.len() - 1], lb[..lb.len() - 1]);
    assert_eq!(
        strip_timestamp(lines(&report)),
        strip_timestamp(
            b.lines()
                .map(|l| serde_json::from_str(l).unwrap())
                .collect()
        )
    );
}

#[test]
fn simulate_and_reverse_write_paths() {
    let dir = tempfile::tempdir().unwrap();
    let paths = dir.path().join("fwd");
    let events = dir.path().join("events.json");
    let code = lab(&[
        "simulate",
        "--kind",
        "reflected-resetting",
        "--r",
        "2",
        "--T",
        "1",
        "--dt",
        "1e-3",
        "--paths",
        "3",
        "--out",
        paths.to_str().unwrap(),
        "--events-out",
        events.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_dir(&paths).unwrap().count(), 3);
    let logs: Value = serde_json::from_str(&std::fs::read_to_string(&events).unwrap()).unwrap();
    assert_eq!(logs.as_array().unwrap().len(), 3);

    let rev = dir.path().join("rev");
    let code = lab(&[
        "reverse",
        "--r",
        "1",
        "--x0",
        "0.5",
        "--T",
        "1",
        "--dt",
        "1e-3",
        "--paths",
        "2",
        "--out",
        rev.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(rev.join("events.json").exists());
    assert!(rev.join("path_000001.csv").exists());
    assert_eq!(lab(&["reverse", "--r", "0", "--init", "stationary"]), 2);
}

#[test]
fn trace_and_trace_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    for which in ["t1", "t2", "oracle"] {
        let code = lab(&[
            "trace",
            "--which",
            which,
            "--r",
            "1",
            "--paths",
            "200",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{which}");
        assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 201);
    }
    assert_eq!(
        lab(&[
            "trace-verify",
            "--r",
            "1",
            "--paths",
            "4000",
            "--xi",
            "0.5,1"
        ]),
        0
    );
}

#[test]
fn analytic_table_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    let code = lab(&[
        "analytic",
        "--formula",
        "psi",
        "--r",
        "1",
        "--points",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 6);
    assert_eq!(lab(&["analytic", "--check", "--r", "4"]), 0);
    assert_eq!(lab(&["analytic", "--from", "2", "--to", "1"]), 2);
}

#[test]
fn localtime_suite_covers_both_processes() {
    let cfg = SuiteConfig {
        r: 1.0,
        paths: 5000,
        seed: 2,
        dt: Some(1e-3),
    };
    let reps = run_suite(Suite::LocalTime, &cfg).unwrap();
    for label in ["x_plus inverse", "x_tilde inverse"] {
        assert_eq!(reps.iter().filter(|r| r.name.starts_with(label)).count(), 3);
    }
}

#[test]
fn duality_control_is_reported_as_must_fail() {
    let cfg = SuiteConfig {
        r: 1.0,
        paths: 20_000,
        seed: 5,
        dt: None,
    };
    let reps = run_suite(Suite::Duality, &cfg).unwrap();
    assert_eq!(reps.len(), 2);
    assert!(reps[1].note.as_deref().unwrap().ends_with("must fail"));
}

#[test]
fn stationary_example_passes() {
    assert_eq!(
        lab(&[
            "--format",
            "json",
            "verify",
            "--suite",
            "stationary",
            "--r",
            "2",
            "--paths",
            "100000",
            "--seed",
            "7"
        ]),
        0
    );
}
