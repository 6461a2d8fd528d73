use std::process::{Command, Output};

use serde_json::Value;

fn atomdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atomdyn"))
        .args(args)
        .env_remove("ATOMDYN_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    csv::Reader::from_reader(o.stdout.as_slice())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn verify_atoms_gen_three() {
    let o = atomdyn(&["verify-atoms", "--gen", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["data"]["atoms"], "512");
    assert!(String::from_utf8_lossy(&o.stderr).contains("512 atoms verified"));
}

#[test]
fn entropy_table() {
    let o = atomdyn(&["entropy", "--n", "2", "--lmax", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    let h: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(h, ["4", "6", "8", "10", "12", "14"]);
    assert!(rows.iter().all(|r| r[2] == r[3]));
}

#[test]
fn mixing_rows_pass() {
    let o = atomdyn(&["measure", "--check", "mixing", "--n", "2", "--lrange", "3..7", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 5);
    for (r, l) in rows.iter().zip(3..) {
        assert_eq!(r[1], l.to_string());
        assert_eq!(r[4], "true");
    }
}

#[test]
fn mixing_below_threshold_is_reported_not_claimed() {
    let o = atomdyn(&["measure", "--check", "mixing", "--n", "2", "--lrange", "1..2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    for r in csv_rows(&o) {
        assert_eq!(r[4], "false");
        assert_eq!(r[5], "false");
        assert_ne!(r[3], "0");
    }
}

#[test]
fn invariance_passes() {
    let o = atomdyn(&["measure", "--check", "invariance", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["data"]["atoms"], 512);
}

#[test]
fn paths_total_and_between() {
    let o = atomdyn(&["paths", "--n", "3", "--l", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["data"]["formula"], "32768");

    let o = atomdyn(&["paths", "--n", "2", "--l", "5", "--from", "3", "--to", "9", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv_rows(&o)[0][4..], ["64", "64", "64"]);
}

#[test]
fn theta_export_table() {
    let o = atomdyn(&["theta", "--n", "1", "--export"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 16 * 4);
    let hit = |a: &str, s: &str| rows.iter().find(|r| r[1] == a && r[2] == s).unwrap()[3..].to_vec();
    assert_eq!(hit("0", "3"), ["3", "0"]);
    assert_eq!(hit("13", "2"), ["5", "3"]);
}

#[test]
fn failed_verification_exits_one_with_counterexample() {
    let o = atomdyn(&["theta", "--n", "2", "--mutant", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["passed"], false);
    let failed: Vec<&Value> = v["records"].as_array().unwrap().iter().filter(|r| r["pass"] == false).collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|r| r["actual"].as_str().unwrap().starts_with("counterexample")));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL theta_"));
}

#[test]
fn layout_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("layout.svg");
    let o = atomdyn(&["layout", "--gen", "2", "--svg", path.to_str().unwrap(), "--arrows", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert_eq!(svg.matches("class=\"atom\"").count(), 1 + 2 + 16);
    assert!(svg.contains("class=\"edge"));
}

#[test]
fn converge_reaches_small_bound() {
    let o = atomdyn(&["converge", "--levels", "12", "--p", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let bound = v["data"]["convergence"]["final_bound"].as_f64().unwrap();
    assert!(bound < 1e-3);
    assert_eq!(v["data"]["convergence"]["rows"][0]["ball_masses"][0], "1/3");
}

#[test]
fn tower_and_orbit() {
    let o = atomdyn(&["tower", "--p", "5", "--gen", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let o = atomdyn(&["orbit", "--depth", "6", "--steps", "3", "--rule", "stream", "--choices", "2,7,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["data"]["iterates"].as_array().unwrap().len(), 4);
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let strip = |mut v: Value| {
        for r in v["records"].as_array_mut().unwrap() {
            r["elapsed_ms"] = Value::Null;
        }
        v
    };
    let args = ["orbit", "--depth", "5", "--steps", "2", "--start", "2:7"];
    assert_eq!(strip(json(&atomdyn(&args))), strip(json(&atomdyn(&args))));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_atomdyn"))
        .args(["entropy", "--n", "1", "--lmax", "2"])
        .env("ATOMDYN_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("entropy.csv")).unwrap();
    assert!(text.starts_with("n,l,H_bits"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["verify-atoms"][..],
        &["verify-atoms", "--gen", "x"],
        &["paths", "--n", "2", "--l", "3", "--from", "1"],
        &["measure", "--check", "entropy", "--n", "2"],
        &["measure", "--check", "mixing", "--n", "2", "--lrange", "5..3"],
        &["orbit", "--depth", "4", "--steps", "1", "--rule", "stream"],
        &["entropy", "--n", "2", "--lmax", "3", "--format", "xml"],
        &["--workers", "0", "verify-atoms", "--gen", "1"],
    ] {
        let o = atomdyn(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("--help"), "{args:?}");
    }
}

#[test]
fn out_of_range_configs_exit_two() {
    for args in [
        &["verify-atoms", "--gen", "6"][..],
        &["theta", "--n", "3", "--export"],
        &["tower", "--p", "2", "--gen", "1", "--format", "svg"],
        &["orbit", "--depth", "3", "--steps", "3"],
    ] {
        let o = atomdyn(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stdout(&o).is_empty(), "{args:?}");
    }
}
