use std::process::{Command, Output};

use catastro::cli::{parse_csv_values, parse_num, CSV_HEADER};
use serde_json::Value;

fn catastro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catastro")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn exact_reports() {
    let out = catastro(&["exact", "--model", "ind", "--dist", "uniform", "--lambda", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("survival=0.5"));

    let out = catastro(&["exact", "--model", "cat", "--dist", "degenerate:p=0", "--lambda", "0.7"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("expected_catastrophes=1"));
}

#[test]
fn verify_bridge_with_parameters() {
    let out = catastro(&[
        "verify", "--suite", "bridge", "--lambda", "1", "--dist", "degenerate:p=0.5", "--replicas", "100000", "--seed", "42",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));
}

#[test]
fn verify_all_passes() {
    let out = catastro(&["verify", "--suite", "all", "--replicas", "20000"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn parse_errors_exit_with_two_and_usage_on_stderr() {
    for args in [
        &["exact", "--model", "ind", "--dist", "gamma:k=2", "--lambda", "2"][..],
        &["exact", "--model", "ind", "--dist", "uniform", "--lambda", "2", "--frobnicate"],
        &["exact", "--model", "nope", "--lambda", "2"],
        &["sweep", "--model", "cat", "--dist", "uniform", "--grid", "1:0:0.5"],
        &["exact", "--model", "ind", "--lambda", "2"],
        &["exact", "--model", "ind", "--dist", "beta:a=-1,b=2", "--lambda", "2"],
        &[],
    ] {
        let out = catastro(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn failing_verification_exits_with_three() {
    // the killed truncation agrees with the product to about 1e-11, not 1e-15
    let out = catastro(&["verify", "--suite", "euler", "--tol", "1e-15"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("FAIL euler.oracle"));
    let out = catastro(&["verify", "--suite", "euler", "--tol", "1e-5"]);
    assert_eq!(out.status.code(), Some(0));
    let out = catastro(&["verify", "--suite", "classical", "--dist", "uniform", "--replicas", "1000"]);
    assert_eq!(out.status.code(), Some(1), "a non-degenerate law is a runtime error, not a failed check");
}

#[test]
fn sweep_power_one_is_linear() {
    let out = catastro(&["sweep", "--model", "cat", "--dist", "power:a=1", "--grid", "0.25:10:0.25", "--out", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let values = parse_csv_values(&text);
    assert_eq!(values.len(), 40);
    for (k, (quantity, v)) in values.iter().enumerate() {
        assert_eq!(quantity, "expected_catastrophes");
        let lambda = 0.25 * (k + 1) as f64;
        assert!((v.unwrap() - (lambda + 2.0)).abs() < 1e-9, "{lambda}: {v:?}");
    }
}

#[test]
fn sweep_power_two_hits_seven_at_one() {
    let out = catastro(&["sweep", "--model", "cat", "--dist", "power:a=2", "--grid", "0.5:5:0.5"]);
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("1,power:a=2,cat,expected_catastrophes,7,")), "{text}");
}

#[test]
fn sweep_uniform_survival_has_a_critical_point() {
    let out = catastro(&["sweep", "--model", "ind", "--dist", "uniform", "--grid", "0.5:4:0.5", "--out", "csv"]);
    let rows: Vec<(f64, String, String)> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[3].to_string(), f[4].to_string())
        })
        .collect();
    for (lambda, quantity, value) in rows {
        match quantity.as_str() {
            "survival" => {
                let want = if lambda <= 1.0 { 0.0 } else { 1.0 - 1.0 / lambda };
                assert!((parse_num(&value).unwrap() - want).abs() < 1e-11);
            }
            "expected_catastrophes" => assert_eq!(value, "inf"),
            other => panic!("unexpected row {other}"),
        }
    }
}

#[test]
fn json_mirrors_csv() {
    let base = ["exact", "--model", "ind", "--dist", "beta:a=2,b=3", "--lambda", "1.5"];
    let csv = stdout(&catastro(&[&base[..], &["--out", "csv"]].concat()));
    let json: Value = serde_json::from_str(&stdout(&catastro(&[&base[..], &["--out", "json"]].concat()))).unwrap();
    let rows = json.as_array().unwrap();
    let values = parse_csv_values(&csv);
    assert_eq!(rows.len(), values.len());
    for (row, (quantity, v)) in rows.iter().zip(values) {
        let obj = row.as_object().unwrap();
        assert_eq!(obj.len(), 9);
        assert!(obj.values().all(|v| !v.is_object() && !v.is_array()));
        assert_eq!(obj["quantity"], Value::String(quantity));
        match &obj["value"] {
            Value::Number(n) => assert_eq!(n.as_f64(), v),
            Value::String(s) => assert_eq!(parse_num(s), v),
            other => panic!("{other}"),
        }
    }
}

#[test]
fn renewal_and_drift() {
    let out = catastro(&["renewal", "--lifetime", "support:0=0.5,1=0.25,2=0.25", "--n", "3", "--out", "csv"]);
    let values = parse_csv_values(&stdout(&out));
    let get = |q: &str| values.iter().find(|(k, _)| k == q).and_then(|(_, v)| *v).unwrap();
    assert_eq!(get("u_3"), 0.25);
    assert!((get("expected_range") - 8.0 / 3.0).abs() < 1e-11);

    let out = catastro(&["drift", "--dist", "uniform", "--lambda", "1", "--imax", "4", "--out", "csv"]);
    let values = parse_csv_values(&stdout(&out));
    assert_eq!(values.len(), 5);
    assert_eq!(values[4].1, Some(-0.5));
}

#[test]
fn simulate_is_seeded() {
    let args = ["simulate", "--model", "classical", "--p", "0.5", "--lambda", "1", "--replicas", "2000", "--out", "csv"];
    let a = stdout(&catastro(&args));
    assert_eq!(a, stdout(&catastro(&args)));
    let b = stdout(&catastro(&[&args[..], &["--seed", "1"]].concat()));
    assert_ne!(a, b);
}
