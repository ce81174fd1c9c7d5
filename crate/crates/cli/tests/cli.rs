use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatkernel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn records(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(Result::unwrap)
        .collect()
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["solve", "--problem", "combo", "--f", "x"][..],
        &["solve", "--problem", "nope"],
        &["solve", "--f", "sin(pi*x"],
        &["solve", "--f", "x*t"],
        &["solve", "--problem", "combo", "--t-min", "0"],
        &["solve", "--problem", "combo", "--nx", "1"],
        &["solve", "--problem", "combo", "--x-max", "1.5"],
        &["solve", "--problem", "combo", "--format", "xml"],
        &["limit", "--x", "0"],
        &["limit", "--x", "1"],
        &["solve", "--problem", "combo", "--config", "/nonexistent/cfg.json"],
    ] {
        let out = run(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn unreachable_tolerance_exits_4() {
    let out = run(&["solve", "--problem", "eigen1", "--nx", "3", "--nt", "2", "--s-max", "10", "--tol", "1e-12"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn series_allows_t_zero() {
    let out = run(&["solve", "--problem", "combo", "--method", "series", "--t-min", "0", "--nx", "3", "--nt", "2"]);
    assert_eq!(code(&out), 0);
    let rows = records(&stdout(&out));
    assert_eq!(&rows[1][0], "0.5");
    assert_eq!(&rows[1][1], "0.0");
    assert_eq!(rows[1][2].parse::<f64>().unwrap(), 1.0 - 0.3);
}

#[test]
fn rows_are_t_major_and_round_trip() {
    let out = run(&["solve", "--problem", "combo", "--nx", "4", "--nt", "3"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("x,t,u,est_error,method,fallback\n"));
    let rows = records(&text);
    assert_eq!(rows.len(), 12);
    for (i, r) in rows.iter().enumerate() {
        let x: f64 = r[0].parse().unwrap();
        let t: f64 = r[1].parse().unwrap();
        assert_eq!(x, [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0][i % 4]);
        assert_eq!(t, [0.1, 0.55, 1.0][i / 4]);
        // shortest round-trip: reformatting reproduces the field exactly
        for field in [&r[0], &r[1], &r[2], &r[3]] {
            let v: f64 = field.parse().unwrap();
            assert_eq!(format!("{v:?}"), field);
        }
    }
}

#[test]
fn identical_invocations_are_bit_identical() {
    let args = ["solve", "--problem", "forced-modal", "--nx", "6", "--nt", "3", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let k = ["kernel", "--s", "-3,0,10", "--nx", "5", "--ny", "5"];
    assert_eq!(run(&k).stdout, run(&k).stdout);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("out.csv");
    fs::write(
        &cfg,
        format!(
            r#"{{"problem": "eigen1", "nx": 5, "nt": 2, "method": "series", "out": {:?}}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();

    let r = run(&["solve", "--config", cfg]);
    assert_eq!(code(&r), 0);
    let rows = records(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 10);
    assert_eq!(&rows[0][4], "series");

    let r = run(&["solve", "--config", cfg, "--nx", "3", "--method", "laplace"]);
    assert_eq!(code(&r), 0);
    let rows = records(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 6);
    assert_eq!(&rows[0][4], "laplace");

    // a problem flag replaces the config's problem instead of conflicting with it
    let r = run(&["solve", "--config", cfg, "--f", "x*(1-x)", "--nx", "2"]);
    assert_eq!(code(&r), 0);

    fs::write(dir.path().join("bad.json"), r#"{"nx": 3, "colour": "red"}"#).unwrap();
    let bad = dir.path().join("bad.json");
    let r = run(&["solve", "--problem", "eigen1", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&r), 2);
}

#[test]
fn json_output_has_metadata_and_rows() {
    let out = run(&["solve", "--f", "x*(1-x)", "--nx", "3", "--nt", "2", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 6);
    assert_eq!(doc["metadata"]["command"], "solve");
    assert!(doc["metadata"]["versions"]["library"].is_string());
    assert!(doc["metadata"]["config"]["inversion"]["tolerance"].is_number());
    assert!(doc["metadata"].get("timings").is_none());

    let timed = run(&["solve", "--f", "x*(1-x)", "--nx", "3", "--nt", "2", "--format", "json", "--timings"]);
    let doc: serde_json::Value = serde_json::from_slice(&timed.stdout).unwrap();
    assert!(doc["metadata"]["timings"]["elapsed_seconds"].is_number());
}

#[test]
fn kernel_table_matches_closed_forms() {
    let out = run(&["kernel", "--s", "0,10", "--nx", "21", "--ny", "21"]);
    assert_eq!(code(&out), 0);
    let rows = records(&stdout(&out));
    assert_eq!(rows.len(), 2 * 21 * 21);
    for r in &rows {
        let v: Vec<f64> = r.iter().map(|f| f.parse().unwrap()).collect();
        let (s, x, y) = (v[0], v[1], v[2]);
        for d in &v[9..12] {
            assert!(*d <= 1e-10, "{r:?}");
        }
        if x == 0.0 {
            assert!(v[3..9].iter().all(|&g| g == 0.0));
        }
        if s == 0.0 {
            assert_eq!(v[4], 0.0);
            let (hi, lo) = if y <= x { (x, y) } else { (y, x) };
            assert!((v[5] - lo * (1.0 - hi)).abs() < 1e-15);
        }
    }
}

#[test]
fn compare_reports_summary_and_threshold() {
    let ok = run(&["compare", "--problem", "combo", "--t-min", "0.05", "--nx", "6", "--nt", "3", "--tol", "1e-6"]);
    assert_eq!(code(&ok), 0);
    let err = String::from_utf8(ok.stderr).unwrap();
    assert!(err.contains("summary: points=18 max_diff="), "{err}");

    let forced = run(&["compare", "--problem", "forced-modal", "--nx", "5", "--nt", "3", "--tol", "1e-5"]);
    assert_eq!(code(&forced), 0);

    let zero = run(&["compare", "--f", "0", "--nx", "3", "--nt", "2"]);
    assert_eq!(code(&zero), 0);
    for r in records(&stdout(&zero)) {
        assert!(r.iter().skip(2).take(5).all(|f| f.parse::<f64>().unwrap() == 0.0));
    }

    let tight = run(&["compare", "--problem", "combo", "--nx", "3", "--nt", "2", "--tol", "1e-15"]);
    assert!(matches!(code(&tight), 4 | 5), "{}", code(&tight));
}

#[test]
fn solve_singular_problem() {
    let out = run(&[
        "solve", "--problem", "singular", "--x-min", "0.25", "--x-max", "0.75", "--nx", "2", "--t-min", "0.5",
        "--nt", "2",
    ]);
    assert_eq!(code(&out), 0);
    let rows = records(&stdout(&out));
    // (x, t) = (0.25, 1)
    assert_eq!((&rows[2][0], &rows[2][1]), ("0.25", "1.0"));
    assert!((rows[2][2].parse::<f64>().unwrap() - 1.0).abs() < 1e-4);
}

#[test]
fn limit_approaches_one_half() {
    let out = run(&["limit", "--x", "0.5", "--s-lo", "1e6", "--s-hi", "1e10", "--ns", "5"]);
    assert_eq!(code(&out), 0);
    let rows = records(&stdout(&out));
    assert_eq!(&rows[0][0], "1000000.0");
    for r in rows {
        assert!((r[1].parse::<f64>().unwrap() - 0.5).abs() < 1e-3);
    }
}

#[test]
fn selftest_passes_and_mutation_fails() {
    let ok = run(&["selftest"]);
    assert_eq!(code(&ok), 0);
    let text = stdout(&ok);
    assert!(text.lines().count() >= 10);
    assert!(text.lines().all(|l| l.starts_with("PASS")));

    let bad = run(&["selftest", "--mutate-g1-term", "2"]);
    assert_ne!(code(&bad), 0);
    assert!(stdout(&bad).lines().any(|l| l.starts_with("FAIL  closed forms")));
}
