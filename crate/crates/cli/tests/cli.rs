//! End-to-end runs of the `ddzeta` binary: outputs, exit codes, config and
//! zero-table plumbing.

use std::path::Path;
use std::process::{Command, Output};

fn ddzeta(args: &[&str]) -> Output {
    ddzeta_in(args, None, &[])
}

fn ddzeta_in(args: &[&str], dir: Option<&Path>, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ddzeta"));
    cmd.args(args).env_remove("DDZETA_ZEROS");
    // Keep a stray ./ddzeta.conf from leaking in.
    let scratch = tempfile::tempdir().unwrap();
    cmd.current_dir(dir.unwrap_or(scratch.path()));
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", stdout(o)))
}

fn num(v: &serde_json::Value) -> f64 {
    v.as_str().expect("decimal string").parse().unwrap()
}

#[test]
fn residue_examples() {
    let o = ddzeta(&["residue", "--m", "2", "--n", "1", "--series", "lambda", "--output", "text"]);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(0), "-1/12"));
    let o = ddzeta(&["residue", "--m", "1", "--n", "2", "--series", "lambda", "--output", "text"]);
    assert_eq!(stdout(&o).trim(), "0");
    let o = ddzeta(&["residue", "--m", "1", "--n", "1", "--series", "lambda"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["error"], "parity");
    let o = ddzeta(&["residue", "--m", "1", "--n", "0", "--series", "mu", "--precision", "30"]);
    let v = num(&json(&o)["residue"]);
    assert!((v + 16.421193331442470).abs() < 1e-12, "{v}");
}

#[test]
fn verify_suites_and_bounds() {
    let o = ddzeta(&["verify", "--suite", "all", "--max", "40"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["passed"], true);
    let o = ddzeta(&["verify", "--suite", "reciprocity", "--max", "3", "--output", "csv"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("case_id,inputs,expected,actual,status"));
    assert_eq!(lines.next(), Some("reciprocity,m=1;n=2,1/12,1/12,ok"));
    assert_eq!(lines.count(), 3);
    let o = ddzeta(&["verify", "--suite", "all", "--max", "0"]);
    assert_eq!((o.status.code(), json(&o)["cases"].as_u64()), (Some(0), Some(0)));
    assert_eq!(ddzeta(&["verify", "--max", "101"]).status.code(), Some(2));
}

#[test]
fn eval_matches_oracle_and_is_deterministic() {
    let args = ["eval", "--s1", "3", "--s2", "3", "--series", "lambda", "--precision", "30"];
    let a = ddzeta(&args);
    let b = ddzeta(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "byte-identical JSON");
    let e = json(&a);
    assert_eq!(e["terms"].as_array().unwrap().len(), 6);
    let o = json(&ddzeta(&["oracle", "--s1", "3", "--s2", "3", "--series", "lambda"]));
    let diff = (num(&e["value"]["re"]) - num(&o["partial_sum"]["re"])).abs();
    assert!(diff <= num(&o["tail_bound"]["value"]) + 1e-12, "diff {diff}");
}

#[test]
fn eval_errors_map_to_exit_codes() {
    let o = ddzeta(&["eval", "--s1", "0", "--s2", "1", "--series", "lambda", "--precision", "30"]);
    assert_eq!(o.status.code(), Some(3));
    let v = json(&o);
    let sets = v["detail"]["matched_sets"].as_array().unwrap();
    assert!(sets.iter().any(|s| s["family"] == "s2 = 1"));
    assert_eq!(ddzeta(&["eval", "--s1", "1,", "--s2", "3"]).status.code(), Some(2));
    assert_eq!(ddzeta(&["eval", "--s1", "3", "--s2", "3", "--precision", "20"]).status.code(), Some(2));
    assert_eq!(ddzeta(&["oracle", "--s1", "0", "--s2", "1"]).status.code(), Some(2));
    let o = ddzeta_in(&["eval", "--s1", "3", "--s2", "3", "--precision", "30"], None, &[("DDZETA_ZEROS", "/no/such/file")]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ddzeta.conf"), "# defaults for this directory\nprecision = 30\noutput = text\n").unwrap();
    let o = ddzeta_in(&["residue", "--m", "0", "--n", "1"], Some(dir.path()), &[]);
    assert_eq!(stdout(&o).trim(), "-1/2");
    let o = ddzeta_in(&["residue", "--m", "0", "--n", "1", "--output", "json"], Some(dir.path()), &[]);
    assert_eq!(json(&o)["residue"], "-1/2");
    let other = dir.path().join("other.conf");
    std::fs::write(&other, "bogus = 1\n").unwrap();
    let o = ddzeta_in(&["residue", "--m", "0", "--n", "1", "--config", other.to_str().unwrap()], Some(dir.path()), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_tables_import_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.txt");
    std::fs::write(&path, "# source_digits: 30\n14.134725141734693790457251983562\n21.022039638771554992628479593897\n").unwrap();
    let o = ddzeta(&["zeros", "--import", path.to_str().unwrap(), "--precision", "30"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["count"], 2);
    let o = ddzeta(&["zeros", "--validate", "2", "--zeros-file", path.to_str().unwrap(), "--precision", "30"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    std::fs::write(&path, "21.0\n14.1\n").unwrap();
    assert_eq!(ddzeta(&["zeros", "--import", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(ddzeta(&["zeros", "--import", "/no/such/file"]).status.code(), Some(4));
    assert_eq!(ddzeta(&["zeros"]).status.code(), Some(2));
    let o = ddzeta(&["zeros", "--validate", "3", "--precision", "30"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn fit_reports_the_pole() {
    let o = ddzeta(&["fit", "--m", "0", "--n", "1", "--series", "lambda", "--precision", "30"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    // The continuation carries -R(0,-1) = +1/2 here (see the decisions ledger).
    assert!((num(&v["c1"]["re"]) - 0.5).abs() < 1e-8);
    assert!(num(&v["c2"]["re"]).abs() < 1e-8);
    assert_eq!(v["ladder"].as_array().unwrap().len(), 8);
}
