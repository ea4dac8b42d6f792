use std::path::Path;
use std::process::{Command, Output};

use entlab::statefile::write_state;
use entlab_core::states::gen_random_density;

fn entlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entlab"))
        .args(args)
        .env("ENTLAB_THREADS", "1")
        .output()
        .expect("entlab runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows of a CSV report, split into fields.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn value_of(text: &str, measure: &str) -> f64 {
    csv_rows(text)
        .into_iter()
        .find(|r| r[0] == measure)
        .unwrap_or_else(|| panic!("no row for {measure}"))[1]
        .parse()
        .unwrap()
}

#[test]
fn singlet_has_one_ebit() {
    let o = entlab(&["compute", "--gen", "werner:1.0", "--measures", "ree,ef", "--restarts", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!((value_of(&out, "ree") - 1.0).abs() < 1e-6);
    assert!((value_of(&out, "ef") - 1.0).abs() < 1e-9);
}

#[test]
fn maximally_mixed_measures() {
    let o = entlab(&["compute", "--gen", "werner:0.0", "--measures", "ree,ef,ea", "--restarts", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(value_of(&out, "ree").abs() < 1e-6);
    assert!(value_of(&out, "ef").abs() < 1e-6);
    assert!((value_of(&out, "ea") - 1.0).abs() < 1e-3);
    let flags: Vec<String> = csv_rows(&out).into_iter().map(|r| r[2].clone()).collect();
    assert_eq!(flags, ["upper-bound-of-min", "upper-bound-of-min", "lower-bound-of-max"]);
}

#[test]
fn every_report_embeds_run_metadata() {
    let o = entlab(&["compute", "--gen", "singlet", "--measures", "sb,ppt", "--seed", "42"]);
    let out = stdout(&o);
    for key in ["# tool: entlab ", "# seed: 42", "# optimizer: restarts=", "# tolerances: structural="] {
        assert!(out.contains(key), "missing {key} in\n{out}");
    }
    assert_eq!(csv_rows(&out)[1][2], "certified-lower");
}

#[test]
fn json_output_parses() {
    let o = entlab(&["compute", "--gen", "singlet", "--measures", "sa,mi", "--format", "json", "--seed", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["meta"]["seed"], "3");
    assert_eq!(v["rows"][0][0], "sa");
    assert!((v["rows"][1][1].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn state_file_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write(
        dir.path(),
        "trace.json",
        "{\"dims\": [2, 2], \"matrix\": [[[0.225,0],[0,0],[0,0],[0,0]], [[0,0],[0.225,0],[0,0],[0,0]], \
         [[0,0],[0,0],[0.225,0],[0,0]], [[0,0],[0,0],[0,0],[0.225,0]]]}",
    );
    let o = entlab(&["compute", "--state", &trace]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("trace"), "{}", stderr(&o));

    let broken = write(dir.path(), "broken.json", "{\n  \"dims\": [2, 2],\n  \"matrix\": [oops]\n}\n");
    let o = entlab(&["compute", "--state", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = entlab(&["compute", "--state", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn state_file_input_matches_the_generator() {
    let dir = tempfile::tempdir().unwrap();
    let rho = gen_random_density(&[2, 3], 2, 5).unwrap();
    let path = write(dir.path(), "rho.json", &write_state(&rho));
    let o = entlab(&["compute", "--state", &path, "--measures", "sa,sb,s,mi"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let gen = entlab(&["compute", "--gen", "random:2:3:2:5", "--measures", "sa,sb,s,mi"]);
    assert_eq!(csv_rows(&stdout(&o)), csv_rows(&stdout(&gen)));
}

#[test]
fn config_errors_exit_two() {
    for args in [
        &["compute", "--gen", "werner:1.5"][..],
        &["compute", "--gen", "werner:1", "--measures", "magic"],
        &["compute", "--gen", "werner:1", "--bogus"],
        &["compute", "--gen", "werner:1", "--state", "x.json"],
        &["compute", "--gen", "werner:1", "--restarts", "0"],
        &["sweep", "--family", "werner", "--grid", ""],
        &["sweep", "--family", "werner", "--grid", "1:0:0.1"],
        &["sweep", "--family", "ghz", "--grid", "0:1:0.5"],
        &["verify", "nothing"],
        &["verify", "proofchain", "--n", "0"],
    ] {
        assert_eq!(entlab(args).status.code(), Some(2), "{args:?}");
    }
    let o = Command::new(env!("CARGO_BIN_EXE_entlab"))
        .args(["verify", "proofchain", "--n", "2"])
        .env("ENTLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn werner_sweep_is_monotone() {
    let o = entlab(&["sweep", "--family", "werner", "--grid", "0:1:0.1", "--measures", "ree", "--restarts", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "param,ree"));
    assert!(out.contains("# flags: ree=upper-bound-of-min"));
    let rows: Vec<(f64, f64)> = csv_rows(&out)
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    assert_eq!(rows.len(), 11);
    for w in rows.windows(2) {
        assert!(w[1].1 >= w[0].1 - 1e-4, "{rows:?}");
    }
    assert!(rows.iter().filter(|(p, _)| *p <= 1.0 / 3.0).all(|(_, v)| *v <= 1e-4));
}

#[test]
fn verify_writes_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("records.csv");
    let o = entlab(&["verify", "proofchain", "--n", "20", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let summary = csv_rows(&stdout(&o));
    assert_eq!(summary[0][0], "proofchain");
    assert_eq!(summary[0][2], "20");
    let records = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv_rows(&records).len(), 20);
    assert!(records.contains("# suite: proofchain"));
}

#[test]
fn legacy_suite_names_are_accepted() {
    let o = entlab(&["verify", "eq8", "--n", "3", "--restarts", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv_rows(&stdout(&o))[0][0], "formation");
}

#[test]
fn conjecture_reports_gap_statistics() {
    let o = entlab(&["verify", "conjecture", "--n", "3", "--samples", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cols: Vec<&str> = v["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    let min = cols.iter().position(|&c| c == "min_slack").unwrap();
    assert!(v["rows"][0][min].as_f64().unwrap() >= -1e-4);
    assert_eq!(v["rows"][0][1], 9);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["sweep", "--family", "random", "--grid", "0:3:1", "--measures", "ef,ppt", "--seed", "6", "--restarts", "4"];
    let a = entlab(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_entlab")).args(args).env("ENTLAB_THREADS", "3").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}
