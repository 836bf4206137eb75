use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn phgen(args: &[&str], stdin: Option<&str>) -> Output {
    phgen_env(args, stdin, None)
}

fn phgen_env(args: &[&str], stdin: Option<&str>, seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_phgen"));
    cmd.args(args)
        .env_remove("PHGEN_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    if let Some(s) = seed_env {
        cmd.env("PHGEN_SEED", s);
    }
    let mut child = cmd.spawn().expect("spawn phgen");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(text) = stdin {
            pipe.write_all(text.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn ok_stdout(out: Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}, stderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn without_wall_time(text: &str) -> String {
    text.lines()
        .filter(|l| !l.contains("\"wall_time_secs\""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn witness_two_by_one() {
    let v = json(&ok_stdout(phgen(&["witness", "--n", "2", "--m", "1"], None)));
    assert_eq!(v["field"], "real");
    assert_eq!(v["J"], json("[[0.0,-1.0],[1.0,0.0]]"));
    assert_eq!(v["H"], json("[[1.0,0.0],[0.0,1.0]]"));
    assert_eq!(v["B"], json("[[1.0],[0.0]]"));
    let report = json(&ok_stdout(phgen(&["check"], Some(&v.to_string()))));
    assert_eq!(report["controllable"], true);
    assert_eq!(report["rank"], 2);
    assert_eq!(report["pbh_agrees"], true);
}

#[test]
fn witness_check_roundtrip() {
    for m in [1usize, 3] {
        for n in 1..=30usize {
            let (ns, ms) = (n.to_string(), m.to_string());
            let w = ok_stdout(phgen(&["witness", "--n", &ns, "--m", &ms], None));
            let r = json(&ok_stdout(phgen(&["check"], Some(&w))));
            assert_eq!(r["controllable"], true, "n={n} m={m}: {r}");
            assert_eq!(r["rank"], n, "n={n} m={m}");
            assert_eq!(r["pbh_agrees"], true, "n={n} m={m}");
        }
    }
}

#[test]
fn complex_witness_roundtrip() {
    let w = ok_stdout(phgen(&["witness", "--n", "3", "--m", "2", "--field", "complex"], None));
    assert!(json(&w)["B"][0][0].is_array());
    let r = json(&ok_stdout(phgen(&["check"], Some(&w))));
    assert_eq!(r["rank"], 3);
}

#[test]
fn genericity_reports_are_reproducible() {
    let args = ["mc-genericity", "--n", "4", "--m", "2", "--trials", "100", "--seed", "7"];
    let a = ok_stdout(phgen(&args, None));
    let b = ok_stdout(phgen(&args, None));
    assert_eq!(without_wall_time(&a), without_wall_time(&b));
    let v = json(&a);
    assert_eq!(v["trials"], 100);
    assert_eq!(v["seeds"]["master"], 7);
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["fraction"], 1.0);
}

#[test]
fn rerun_from_echoed_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let csv = dir.path().join("report.csv");
    let outs = out.to_str().unwrap();
    let csvs = csv.to_str().unwrap();
    let args = [
        "mc-genericity", "--n", "3", "--m", "1", "--trials", "50", "--seed", "11",
        "--cross-check", "--format", "both", "--out", outs, "--csv", csvs,
    ];
    let summary = ok_stdout(phgen(&args, None));
    assert!(summary.contains("50 of 50"), "{summary}");
    let first = std::fs::read_to_string(&out).unwrap();
    let first_csv = std::fs::read_to_string(&csv).unwrap();
    assert!(first_csv.starts_with("batch,trials,controllable"));

    let saved = dir.path().join("saved.json");
    std::fs::copy(&out, &saved).unwrap();
    ok_stdout(phgen(&["mc-genericity", "--config", saved.to_str().unwrap()], None));
    let second = std::fs::read_to_string(&out).unwrap();
    assert_eq!(without_wall_time(&first), without_wall_time(&second));
    assert_eq!(first_csv, std::fs::read_to_string(&csv).unwrap());
}

#[test]
fn probe_rows_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("probe.csv");
    let out = ok_stdout(phgen(
        &[
            "perturb-probe", "--n", "3", "--m", "1", "--k", "1", "--trials", "25", "--eps",
            "0,1e-3,1e-1", "--seed", "5", "--format", "both", "--csv", csv.to_str().unwrap(),
        ],
        None,
    ));
    let v = json(&out);
    let fractions: Vec<f64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["fraction"].as_f64().unwrap())
        .collect();
    assert_eq!(fractions, vec![0.0, 1.0, 1.0]);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn probe_rejects_controllable_base() {
    let w = ok_stdout(phgen(&["witness", "--n", "3"], None));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    std::fs::write(&path, w).unwrap();
    let out = phgen(&["perturb-probe", "--input", path.to_str().unwrap(), "--trials", "3"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("controllable"));
}

#[test]
fn pack_unpack_pipeline() {
    let s = ok_stdout(phgen(
        &["sample", "--n", "3", "--m", "2", "--field", "complex", "--seed", "9"],
        None,
    ));
    let packed = ok_stdout(phgen(&["pack"], Some(&s)));
    let p = json(&packed);
    assert_eq!(p["coords"].as_array().unwrap().len(), 2 * 9 + 2 * 6);
    let back = ok_stdout(phgen(&["unpack"], Some(&packed)));
    assert_eq!(json(&back), json(&s));
}

#[test]
fn sample_batches_validate() {
    let lines = ok_stdout(phgen(&["sample", "--n", "4", "--m", "1", "--count", "5", "--seed", "2"], None));
    assert_eq!(lines.lines().count(), 5);
    let v = ok_stdout(phgen(&["validate", "--require-pd"], Some(&lines)));
    assert_eq!(v.lines().count(), 5);
    for l in v.lines() {
        assert!(json(l)["min_h_eigenvalue"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn seed_precedence() {
    let base = ["sample", "--n", "2", "--m", "1"];
    let from_env = ok_stdout(phgen_env(&base, None, Some("123")));
    let from_flag = ok_stdout(phgen(&[&base[..], &["--seed", "123"]].concat(), None));
    let default = ok_stdout(phgen(&base, None));
    assert_eq!(from_env, from_flag);
    assert_ne!(from_env, default);
    let overridden = ok_stdout(phgen_env(&[&base[..], &["--seed", "0"]].concat(), None, Some("123")));
    assert_eq!(overridden, default);
}

#[test]
fn exit_codes() {
    let usage = phgen(&["witness", "--bogus"], None);
    assert_eq!(usage.status.code(), Some(2));
    assert_eq!(phgen_env(&["witness"], None, Some("nope")).status.code(), Some(2));
    let both = phgen(&["prop1", "--i-max", "10", "--format", "both"], None);
    assert_eq!(both.status.code(), Some(2));

    let not_pd = r#"{"field":"real","n":1,"m":1,"J":[[0]],"H":[[-1]],"B":[[1]]}"#;
    let out = phgen(&["validate", "--require-pd"], Some(not_pd));
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.trim_end().lines().count(), 1);
    assert!(stderr.contains("positive definite"));
    assert_eq!(phgen(&["validate"], Some(not_pd)).status.code(), Some(0));

    let not_skew = r#"{"field":"real","n":2,"m":1,"J":[[0,1],[1,0]],"H":[[1,0],[0,1]],"B":[[1],[0]]}"#;
    assert_eq!(phgen(&["check"], Some(not_skew)).status.code(), Some(1));
    assert_eq!(phgen(&["witness", "--n", "0"], None).status.code(), Some(1));
}

#[test]
fn config_file_errors_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"trails": 3}"#).unwrap();
    let out = phgen(&["mc-genericity", "--config", bad.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    let missing = Path::new("/nonexistent/phgen.json");
    let out = phgen(&["prop1", "--config", missing.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn prop1_csv_and_json() {
    let csv = ok_stdout(phgen(&["prop1", "--i-max", "1000", "--format", "csv"], None));
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "i,partial_measure,gap");
    assert_eq!(rows.len(), 4);
    let v = json(&ok_stdout(phgen(&["prop1", "--i-max", "7", "--x", "3.0"], None)));
    assert_eq!(v["membership"]["in_s_up_to_i_max"], true);
    assert_eq!(v["partial_measure"].as_f64().unwrap() < v["limit"].as_f64().unwrap(), true);
}

#[test]
fn distance_for_witness() {
    let w = ok_stdout(phgen(&["witness", "--n", "2"], None));
    let v = json(&ok_stdout(phgen(&["dist-unctrb", "--grid-points", "60"], Some(&w))));
    assert!(v["value"].as_f64().unwrap() > 0.1, "{v}");
    assert_eq!(v["box_radius"], 2.0);
    assert_eq!(v["config"]["grid_points"], 60);
}
