use std::fs;
use std::process::{Command, Output};

fn riesz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riesz"))
        .args(args)
        .env_remove("RIESZ_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[test]
fn steinweiss_suite_passes() {
    let o = riesz(&[
        "verify",
        "--suite",
        "steinweiss",
        "--tol",
        "1e-8",
        "--trials",
        "200",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("PASS steinweiss max rel_err"));
    assert!(out.contains("# config: {"));
}

#[test]
fn excluded_partition_point_is_a_config_error() {
    let o = riesz(&[
        "verify",
        "--suite",
        "partition",
        "--tol",
        "1e-12",
        "--t-values",
        "0.25,1.0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[0,1)"));
}

#[test]
fn failing_assertion_exits_one_and_names_the_check() {
    let o = riesz(&[
        "verify",
        "--suite",
        "steinweiss",
        "--tol",
        "1e-30",
        "--trials",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("steinweiss max rel_err"));
}

#[test]
fn region_csv_carries_the_boundary_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let svg = dir.path().join("r.svg");
    for path in [&a, &b] {
        let o = riesz(&[
            "region",
            "--n",
            "2",
            "--out",
            path.to_str().unwrap(),
            "--svg",
            svg.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let ta = fs::read_to_string(&a).unwrap();
    let tb = fs::read_to_string(&b).unwrap();
    assert!(ta.starts_with("# config: {"));
    assert_eq!(body(&ta), body(&tb));
    let rows: Vec<&str> = ta.lines().filter(|l| l.ends_with(",true,")).collect();
    assert!(rows.iter().any(|l| l.starts_with("0,1,")), "{rows:?}");
    assert!(rows.iter().any(|l| l.starts_with("0.25,0,")), "{rows:?}");
    assert!(rows.iter().any(|l| l.starts_with("0.125,0.5,")), "{rows:?}");
    assert!(fs::read_to_string(&svg).unwrap().contains("<polyline"));
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"trials": 3, "tol": 1e-30, "seed": 7}"#).unwrap();
    let o = riesz(&[
        "verify",
        "--suite",
        "steinweiss",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = riesz(&[
        "verify",
        "--suite",
        "steinweiss",
        "--config",
        cfg.to_str().unwrap(),
        "--tol",
        "1e-8",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.contains("\"trials\":3") && out.contains("\"seed\":7") && out.contains("\"tol\":1e-8"),
        "{out}"
    );
    fs::write(&cfg, r#"{"no_such_field": 1}"#).unwrap();
    assert_eq!(
        riesz(&["verify", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(riesz(&["verify", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn thread_knob_from_environment() {
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_riesz"))
            .args(["verify", "--suite", "partition", "--trials", "100"])
            .env("RIESZ_THREADS", v)
            .output()
            .unwrap()
    };
    assert_eq!(run("1").status.code(), Some(0));
    assert_eq!(run("many").status.code(), Some(2));
}

#[test]
fn kernel_profile_and_comparison() {
    let o = riesz(&[
        "kernel",
        "--alpha",
        "1",
        "--r-max",
        "4",
        "--points",
        "9",
        "--compare",
        "true",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.contains("r,kernel\n0.000000000,1.570796326794896"),
        "{out}"
    );
    assert!(out.contains("PASS kernel vs transform"));
}

#[test]
fn probes_report_and_assert() {
    let o = riesz(&[
        "probe",
        "--kind",
        "norm",
        "--samples",
        "128",
        "--alpha",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("lower bound"));
    assert_eq!(
        body(&out).lines().filter(|l| l.contains(",2,2,1,")).count(),
        32
    );
    let o = riesz(&[
        "probe",
        "--kind",
        "convergence",
        "--pair",
        "bandlimited",
        "--alpha",
        "0",
        "--samples",
        "256",
        "--box-length",
        "16",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS saturated past band radius"));
    let o = riesz(&["probe", "--kind", "decay", "--j-min", "3", "--j-max", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_reports_both_paths() {
    let o = riesz(&["bench", "--samples", "128", "--reps", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("tensor") && out.contains("loop") && out.contains("PASS path agreement"));
}
