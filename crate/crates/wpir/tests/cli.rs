use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wpir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpir")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn curve_three_files() {
    let o = wpir(&["curve", "--files", "3", "--metric", "mi", "--samples", "101"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "metric,M,rho_bar,capacity,is_breakpoint");
    // 101 samples plus the interior knee at w = 2
    assert_eq!(lines.len() - 1, 102);
    assert_eq!(lines.iter().filter(|l| l.ends_with(",1")).count(), 2);
    assert!(lines.contains(&"mi,3,0.369070246428542,0.5,1"));
    assert_eq!(lines[1], "mi,3,0,0.333333333333333,1");
    assert_eq!(*lines.last().unwrap(), "mi,3,1,1,0");
}

#[test]
fn curve_upper_bound_and_single_file() {
    let o = wpir(&["curve", "--files", "100", "--metric", "ub", "--samples", "11", "--no-breakpoints"]);
    for line in stdout(&o).lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (rho_bar, c): (f64, f64) = (f[2].parse().unwrap(), f[3].parse().unwrap());
        assert!((c - 100f64.powf(rho_bar - 1.0)).abs() < 1e-14, "{line}");
    }
    let o = wpir(&["curve", "--files", "1", "--metric", "mi", "--samples", "5"]);
    assert!(stdout(&o).lines().skip(1).all(|l| l.split(',').nth(3) == Some("1")));
}

#[test]
fn scheme_summaries() {
    let o = wpir(&["scheme", "--files", "3", "--kind", "weight:2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["M"], 3);
    assert_eq!(v["queries"][2]["probs"], serde_json::json!(["0", "1/2", "1/2"]));
    let summary = String::from_utf8(o.stderr).unwrap();
    assert!(summary.contains("D = 2\n") && summary.contains("MI = 0.584962500721156"), "{summary}");

    let o = wpir(&["scheme", "--files", "6", "--kind", "partition:3"]);
    let summary = String::from_utf8(o.stderr).unwrap();
    assert!(summary.contains("D = 2\n") && summary.contains("MaxL = 1.58496250072116"), "{summary}");

    let o = wpir(&["scheme", "--files", "4", "--kind", "target:maxl:0"]);
    let v = json(&o);
    assert_eq!(v["queries"].as_array().unwrap().len(), 1);
    assert!(String::from_utf8(o.stderr).unwrap().contains("D = 4\n"));
}

#[test]
fn scheme_to_file_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let o = wpir(&["scheme", "--files", "3", "--kind", "mix:1/3:2:1", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("D = 5/3\n"));
    let v = wpir::cli::read_json(&path).unwrap();
    assert_eq!(v["queries"].as_array().unwrap().len(), 6);
    assert_eq!(v["queries"][3]["tag"], 1);
}

#[test]
fn scheme_parameter_errors() {
    for kind in ["weight:4", "partition:2", "target:mi:5", "nonsense"] {
        let o = wpir(&["scheme", "--files", "3", "--kind", kind]);
        assert_eq!(o.status.code(), Some(2), "{kind}");
    }
}

#[test]
fn verify_examples() {
    let o = wpir(&["verify", "--files", "5", "--sweep", "20", "--metric", "maxl"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["ok"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 20);

    let o = wpir(&["verify", "--files", "3", "--d", "3", "--metric", "maxl"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["checks"][0]["bound_bits"], 0.0);
    assert_eq!(v["checks"][0]["lp_ok"], true);

    let o = wpir(&["verify", "--files", "2", "--oracle", "--grid", "64", "--metric", "mi", "--d", "3/2,2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let c = &v["checks"][0];
    let gap = c["oracle_min_bits"].as_f64().unwrap() - c["bound_bits"].as_f64().unwrap();
    assert!((0.0..=0.02).contains(&gap));
    assert_eq!(c["lp_ok"], serde_json::Value::Null);
    assert_eq!(c["rd_ok"], true);
}

#[test]
fn verify_failure_exits_one() {
    // a zero tolerance cannot be met off the grid: D = 4/3 needs
    // P = 1/3 mass shifts that a grid of 4 cannot express
    let o = wpir(&["verify", "--files", "2", "--oracle", "--grid", "4", "--oracle-tol", "0", "--metric", "mi", "--d", "4/3"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("M=2 D=4/3 check=oracle-tightness"), "{err}");
}

#[test]
fn verify_usage_errors() {
    assert_eq!(wpir(&["verify", "--files", "3", "--metric", "maxl"]).status.code(), Some(2));
    assert_eq!(wpir(&["verify", "--files", "3", "--metric", "ub", "--d", "2"]).status.code(), Some(2));
    assert_eq!(wpir(&["verify", "--files", "5", "--oracle", "--metric", "mi", "--d", "2"]).status.code(), Some(2));
    assert_eq!(wpir(&["verify", "--files", "3", "--metric", "mi", "--d", "7/2"]).status.code(), Some(2));
    assert_eq!(wpir(&["verify", "--files", "3", "--metric", "mi", "--bogus"]).status.code(), Some(2));
}

#[test]
fn simulate_examples() {
    let o = wpir(&["simulate", "--files", "3", "--kind", "weight:2", "--trials", "10000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["success_count"], 10000);
    assert_eq!(v["empirical_cost"], 2.0);
    assert_eq!(v["audit"]["consistent"], true);

    let o = wpir(&["simulate", "--files", "1", "--kind", "weight:1", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["success_count"], 10);
    assert_eq!(v["empirical_cost"], 1.0);
}

#[test]
fn simulate_rejects_inconsistent_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    // file 3 puts mass on {1,2}, which does not retrieve it
    fs::write(
        &bad,
        r#"{"M": 3, "queries": [{"support": [1, 2], "probs": ["1", "1", "1/2"]}, {"support": [3], "probs": ["0", "0", "1/2"]}]}"#,
    )
    .unwrap();
    let o = wpir(&["simulate", "--scheme", bad.to_str().unwrap(), "--trials", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("support consistency"), "{err}");
}

#[test]
fn simulate_with_database_file() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("db.bin");
    wpir::write_database(&db, &wpir::generate_database(4, 3, 16, 1).unwrap()).unwrap();
    let o = wpir(&["simulate", "--files", "4", "--kind", "weight:3", "--db", db.to_str().unwrap(), "--trials", "500"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["beta"], 3);

    let o = wpir(&["simulate", "--files", "3", "--kind", "weight:2", "--db", db.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn region_examples() {
    let o = wpir(&["region", "--files", "3", "--points", "0"]);
    assert_eq!(
        stdout(&o),
        "metric,M,D,rho,is_breakpoint\nany,3,1,1.58496250072116,1\nany,3,2,0.584962500721156,1\nany,3,3,0,1\n"
    );
    let o = wpir(&["region", "--files", "1"]);
    assert_eq!(stdout(&o), "metric,M,D,rho,is_breakpoint\nany,1,1,0,1\n");
    let o = wpir(&["region", "--files", "4", "--points", "1", "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["points"].as_array().unwrap().len(), 4 + 2 * 3);
}

#[test]
fn outputs_are_byte_identical() {
    let runs: [&[&str]; 5] = [
        &["curve", "--files", "7", "--metric", "maxl", "--samples", "33"],
        &["scheme", "--files", "5", "--kind", "target:mi:1.1"],
        &["verify", "--files", "4", "--sweep", "9", "--metric", "maxl"],
        &["simulate", "--files", "5", "--kind", "mix:1/4:3:2", "--trials", "3000", "--seed", "11", "--beta", "2"],
        &["region", "--files", "6", "--format", "json"],
    ];
    for args in runs {
        let a = wpir(args);
        let b = wpir(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn unwritable_output_fails() {
    let o = wpir(&["curve", "--files", "3", "--metric", "mi", "--out", "/nonexistent/dir/c.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!String::from_utf8(o.stderr).unwrap().is_empty());
    assert!(!Path::new("/nonexistent/dir/c.csv").exists());
}
