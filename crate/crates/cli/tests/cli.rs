use std::process::{Command, Output};

const WORKED: &str = r#"{"p":2,"balls":[{"center":"0","radius_exp":-1},{"center":"1","radius_exp":-2}]}"#;
const UNIT: &str = r#"{"p":2,"balls":[{"center":"0","radius_exp":0}]}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padic-dpp")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn identities_pass_on_worked_set() {
    let o = run(&["identities", "--set", WORKED]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().count() > 3);
    assert!(!out.contains("FAIL"));
}

#[test]
fn covariance_csv_sums_cancel() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cov.csv");
    let o = run(&["cov", "--set", WORKED, "--m", "1", "--horizon", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("center_literal,norm,cov_numerator,cov_denominator,cov_f64"));
    let total: f64 = lines.map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!(total.abs() < 1e-12, "{total}");
}

#[test]
fn unit_ball_sample_has_one_point_per_coset() {
    let o = run(&["sample", "--set", UNIT, "--m", "2", "--r", "1", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let points: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(points.len(), 4);
    let mut fractional: Vec<String> = points
        .iter()
        .map(|p| p.split_once('.').map(|(_, f)| f.to_string()).unwrap_or_default())
        .collect();
    fractional.sort();
    fractional.dedup();
    assert_eq!(fractional.len(), 4);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let args = ["sample", "--set", WORKED, "--m", "2", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["sample", "--set", WORKED, "--m", "2", "--seed", "11", "--trial", "1"]);
    assert_eq!(c.status.code(), Some(0));
}

#[test]
fn thread_count_does_not_change_output() {
    let base = ["experiment", "--set", WORKED, "--m", "1", "--horizon", "3", "--trials", "300", "--seed", "5"];
    let one = run(&[&base[..], &["--threads", "1"]].concat());
    let four = run(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    assert_eq!(one.stdout, four.stdout);
    let json: serde_json::Value = serde_json::from_slice(&one.stdout).unwrap();
    assert!(json["prediction_rmse"].is_number());
}

#[test]
fn reports_are_json() {
    let o = run(&["check-rigidity", "--set", WORKED]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["rigid"], true);

    let o = run(&["predict", "--set", WORKED, "--m", "1", "--horizon", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let sol: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(sol["residual_sd"].as_f64().unwrap() <= sol["variance"].as_f64().unwrap().sqrt());

    let o = run(&["spectral", "--set", WORKED, "--m", "1", "--horizon", "3", "--depth", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap();
}

#[test]
fn ft_grid_is_bounded_by_measure() {
    let o = run(&["ft", "--set", WORKED, "--depth", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("y,norm,re,im,exact\n"));
    for line in out.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let (re, im): (f64, f64) = (cols[2].parse().unwrap(), cols[3].parse().unwrap());
        assert!(re.hypot(im) <= 0.75 + 1e-12, "{line}");
    }
}

#[test]
fn set_can_be_read_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.json");
    std::fs::write(&path, WORKED).unwrap();
    let o = run(&["identities", "--set", path.to_str().unwrap(), "--m", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn validation_errors_exit_two_with_one_line() {
    let cases: [&[&str]; 5] = [
        &["bogus"],
        &["identities", "--set", "{not json"],
        &["identities", "--set", r#"{"p":4,"balls":[]}"#],
        &["cov", "--set", WORKED, "--m", "0", "--horizon", "4"],
        &["predict", "--set", WORKED, "--m", "2", "--horizon", "2"],
    ];
    for args in cases {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert_eq!(stderr(&o).trim_end().lines().count(), 1, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
