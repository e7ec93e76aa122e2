use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sas_transim_cli::{cmd_bench, BenchArgs, BenchFormat, HandoffArg, ModelArgs, SeriesArgs};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sas-transim"))
        .args(args)
        .output()
        .expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_starts_from_the_case_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("smib.csv");
    let summary = ok(&[
        "simulate",
        "smib",
        "--n-terms",
        "5",
        "--window",
        "0.17",
        "--horizon",
        "1",
        "--out",
        path(&out),
    ]);
    assert!(summary.contains("windows = 6"), "{summary}");
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,delta_1,delta_2,omega_1,omega_2"));
    assert_eq!(lines.next(), Some("0,1.1429,0,3.7639,0"));
    assert!(csv.lines().last().unwrap().starts_with("1,"));
}

#[test]
fn simulate_writes_csv_to_stdout_without_out() {
    let csv = ok(&["simulate", "smib", "--engine", "rk4", "--horizon", "0.01"]);
    assert!(csv.starts_with("t,delta_1"));
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn relative_output_uses_the_reference() {
    let csv = ok(&[
        "simulate",
        "ieee9",
        "--horizon",
        "0.2",
        "--relative",
        "--reference",
        "1",
    ]);
    assert_eq!(csv.lines().next(), Some("t,delta_2_1,delta_3_1"));
}

#[test]
fn identical_files_compare_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    ok(&[
        "simulate",
        "ieee9",
        "--engine",
        "rk4",
        "--horizon",
        "0.5",
        "--out",
        path(&a),
    ]);
    let rep = ok(&["compare", path(&a), path(&a), "--format", "csv"]);
    let rows: Vec<&str> = rep.lines().collect();
    assert_eq!(rows[0], "machine,max_abs,rmse,t_at_max");
    for r in &rows[1..4] {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!((f[1], f[2]), ("0", "0"), "{r}");
    }
}

#[test]
fn compare_catches_machine_count_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    ok(&[
        "simulate",
        "ieee9",
        "--engine",
        "rk4",
        "--horizon",
        "0.1",
        "--out",
        path(&a),
    ]);
    ok(&[
        "simulate",
        "smib",
        "--engine",
        "rk4",
        "--horizon",
        "0.1",
        "--out",
        path(&b),
    ]);
    let o = run(&["compare", path(&a), path(&b)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sas_and_rk4_files_agree_on_smib() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("sas.csv");
    let b = dir.path().join("rk4.csv");
    ok(&[
        "simulate",
        "smib",
        "--window",
        "0.01",
        "--horizon",
        "1",
        "--out",
        path(&a),
    ]);
    ok(&[
        "simulate",
        "smib",
        "--engine",
        "rk4",
        "--horizon",
        "1",
        "--out",
        path(&b),
    ]);
    let rep = ok(&[
        "compare",
        path(&a),
        path(&b),
        "--reference",
        "2",
        "--format",
        "csv",
    ]);
    let max: f64 = rep
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(max < 0.01, "{rep}");
}

#[test]
fn ra_at_equilibrium_has_no_root() {
    let out = ok(&["ra", "smib", "--state", "equilibrium", "--format", "csv"]);
    assert!(out.lines().nth(1).unwrap().contains(",none,"), "{out}");
    let out = ok(&["ra", "smib", "--format", "csv"]);
    assert!(!out.lines().nth(1).unwrap().contains(",none,"), "{out}");
}

#[test]
fn nine_bus_modes() {
    let out = ok(&["modes", "ieee9", "--h3", "4.5", "--format", "csv"]);
    let periods: Vec<f64> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(periods.len(), 2);
    assert!((periods[0] - 0.951).abs() / 0.951 < 0.03);
    assert!((periods[1] - 0.552).abs() / 0.552 < 0.03);
}

#[test]
fn hmin_from_explicit_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("in.json");
    fs::write(
        &f,
        r#"{"h": 1.0, "d": 0.0, "omega0": 377.0, "pm": 2.5, "e": 1.0566, "g": 2.2361, "e_inf": 1.0,
            "y": 7.4753, "theta": 1.5458, "delta0_machine": -0.565, "ddelta0_machine": -10.908,
            "delta0_ref": 0.0563, "ddelta0_ref": 1.548, "i_loa_max": 3.0}"#,
    )
    .unwrap();
    let out = ok(&[
        "hmin",
        "--inputs",
        path(&f),
        "--iloa-max",
        "3",
        "--format",
        "csv",
    ]);
    let h: f64 = out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .last()
        .unwrap()
        .parse()
        .unwrap();
    assert!((h - 106.0).abs() / 106.0 < 0.1, "{out}");
    fs::write(&f, r#"{"h": 1.0}"#).unwrap();
    assert_eq!(run(&["hmin", "--inputs", path(&f)]).status.code(), Some(1));
}

#[test]
fn fleet_hmin_picks_the_largest() {
    let out = ok(&[
        "hmin",
        "ieee39",
        "--target-ra",
        "0.2",
        "--iloa-max",
        "3",
        "--fleet",
    ]);
    assert!(out.contains("fleet H_min"), "{out}");
}

#[test]
fn validation_errors_exit_with_one() {
    assert_eq!(
        run(&["simulate", "smib", "--horizon", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["simulate", "no-such-case"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        run(&["simulate", "smib", "--inertia", "7=3.0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_failures_exit_with_two() {
    let o = run(&[
        "simulate",
        "smib",
        "--window",
        "0.5",
        "--adaptive",
        "--iloa-max",
        "0.000001",
    ]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        ok(&[
            "--jobs",
            "2",
            "simulate",
            "ieee39",
            "--window",
            "0.04",
            "--horizon",
            "1",
            "--out",
            path(p),
        ]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let r1 = ok(&["ra", "ieee39", "--format", "csv"]);
    let r2 = ok(&["--jobs", "1", "ra", "ieee39", "--format", "csv"]);
    assert_eq!(r1, r2);
}

#[test]
fn case_directory_is_searched() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../core/cases/smib.json"
    ))
    .unwrap();
    fs::write(dir.path().join("mine.json"), text).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sas-transim"))
        .args(["ra", "mine.json"])
        .env("SAS_TRANSIM_CASE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
}

#[test]
fn single_window_bench() {
    let args = BenchArgs {
        model: ModelArgs {
            case: "smib".into(),
            inertia: vec![],
            reference: None,
            dt: 1e-3,
        },
        series: SeriesArgs {
            n_terms: 3,
            window: Some(0.1),
            iloa_max: 5.0,
            adaptive: false,
            handoff: HandoffArg::Analytic,
            samples: 3,
        },
        horizon: None,
        min_time: 0.01,
        format: BenchFormat::Json,
    };
    let rep = cmd_bench(&args).unwrap();
    assert_eq!(rep.windows, 1);
    assert_eq!(rep.horizon_s, 0.1);
    assert!(
        (rep.speed_ratio_vs_rk4 - rep.rk4_s / (rep.online_eval_s * rep.windows as f64)).abs()
            < 1e-9 * rep.speed_ratio_vs_rk4
    );
    let json: serde_json::Value = serde_json::from_str(&rep.render(BenchFormat::Json)).unwrap();
    assert!(json.get("T_over_tau").is_some());
}
