use std::fs;
use std::path::Path;
use std::process::Command;

use monochrome_cli::run_cli;
use monochrome_cli::store::{Kind, Store};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("monochrome").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_coloring(dir: &Path, name: &str, r: u32, colors: &[u32]) -> String {
    let path = dir.join(name);
    let body: Vec<String> = colors.iter().map(u32::to_string).collect();
    fs::write(&path, format!("{} {r}\n{}\n", colors.len(), body.join(" "))).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn threshold_schur_two_colors() {
    let (code, out, _) = run(&["threshold", "--family", "schur", "--colors", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("T = 5\n"), "{out}");
    assert!(out.contains("avoider for N = 4: 1221"));
}

#[test]
fn threshold_writes_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let (code, out, _) =
        run(&["threshold", "--family", "vdw:3", "--colors", "2", "--certificate", cert.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("T = 9"));
    assert!(out.contains(&format!("certificate: {}", cert.display())));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(v["n"], 8);
    assert_eq!(v["verified"], true);
}

#[test]
fn witness_on_all_one_coloring() {
    let dir = tempfile::tempdir().unwrap();
    let ones = write_coloring(dir.path(), "ones.txt", 1, &[1; 6]);
    let (code, out, _) = run(&["witness", "--family", "xyxy", "--coloring", &ones]);
    assert_eq!(code, 0);
    assert!(out.contains("witness: assignment (1, 1) values (1, 2, 1) color 1"), "{out}");

    let (code, out, _) = run(&["witness", "--family", "xyxy", "--coloring", &ones, "--distinct"]);
    assert_eq!(code, 0);
    assert!(out.contains("witness: assignment (1, 2) values (1, 3, 2) color 1"), "{out}");
}

#[test]
fn witness_none_and_all() {
    let dir = tempfile::tempdir().unwrap();
    let parity = write_coloring(dir.path(), "parity.txt", 2, &[1, 2, 1, 2, 1, 2, 1, 2]);
    let (code, out, _) = run(&["witness", "--family", "x_xp1", "--coloring", &parity]);
    assert_eq!(code, 1);
    assert!(out.contains("no witness"));
    let schur3 = write_coloring(dir.path(), "s.txt", 1, &[1; 4]);
    let (code, out, _) = run(&["witness", "--family", "schur", "--coloring", &schur3, "--all"]);
    assert_eq!(code, 0);
    assert!(out.contains("witnesses: 6"), "{out}");
}

#[test]
fn reduce_difference_of_squares() {
    let dir = tempfile::tempdir().unwrap();
    let ones = write_coloring(dir.path(), "ones.txt", 1, &[1; 50]);
    let sol = dir.path().join("sol.json");
    let (code, out, _) =
        run(&["reduce", "--coeffs", "1,-1", "--coloring", &ones, "--out", sol.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("u = (1, -1)\n"));
    assert!(out.contains("b = 4\n"));
    assert!(out.contains("solution: a = (8, 3, 1) color 1 from (x, y) = (8, 4)"), "{out}");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    for key in ["c", "u", "b", "a", "color", "source_witness"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let (code, _, err) = run(&["reduce", "--coeffs", "1,1", "--coloring", &ones]);
    assert_eq!(code, 2);
    assert!(err.contains("sum"), "{err}");
}

#[test]
fn avoid_exit_codes() {
    let (code, out, _) = run(&["avoid", "--family", "schur", "--colors", "2", "--n", "4"]);
    assert_eq!(code, 0);
    assert!(out.contains("avoiding coloring: 1221"));
    let (code, out, _) = run(&["avoid", "--family", "schur", "--colors", "2", "--n", "5"]);
    assert_eq!(code, 1);
    assert!(out.contains("no avoiding coloring"));
    let (code, _, err) = run(&["avoid", "--family", "schur", "--colors", "3", "--n", "14", "--max-nodes", "20"]);
    assert_eq!(code, 3);
    assert!(err.contains("node budget"));
    let (code, out, _) = run(&["avoid", "--family", "x_xp1", "--colors", "2", "--n", "30", "--greedy", "0"]);
    assert_eq!(code, 0);
    assert!(out.contains("avoiding coloring: 121212"));
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["nonsense"]).0, 2);
    assert_eq!(run(&["threshold", "--family", "schur"]).0, 2);
    let (code, _, err) = run(&["threshold", "--family", "nope", "--colors", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("neither a family file nor a preset"));
    let (code, _, _) = run(&["witness", "--family", "schur", "--coloring", "/nonexistent/c.txt"]);
    assert_eq!(code, 2);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("threshold"));
}

#[test]
fn family_show_and_moreira() {
    let (code, out, _) = run(&["family", "show", "--preset", "vdw:3"]);
    assert_eq!(code, 0);
    assert!(out.contains("family: vdw:3 (3 terms, 2 variables)"));
    let (code, out, _) = run(&["family", "moreira", "--s", "4"]);
    assert_eq!(code, 0);
    assert!(out.contains("(15 terms, 5 variables)"), "{out}");

    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("fam.json");
    fs::write(&f, r#"{"name":"pairs","num_vars":2,"terms":["x0","x0 + 2*x1"],"distinct_required":false}"#).unwrap();
    let (code, out, _) = run(&["family", "show", "--file", f.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("x0 + 2*x1"));
    let (code, out, _) = run(&["threshold", "--family", f.to_str().unwrap(), "--colors", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("T = "));
}

#[test]
fn construct_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let colors: Vec<u32> = (1..=1000).map(|i| if i % 2 == 1 { 1 } else { 2 }).collect();
    let c = write_coloring(dir.path(), "parity.txt", 2, &colors);
    let trace = dir.path().join("trace.json");
    let (code, out, _) = run(&["construct", "--coloring", &c, "--trace", trace.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("witness: x = 2, y = 4, x + y = 6, xy = 8, color 2"), "{out}");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(v["t"], serde_json::json!([1, 2, 2]));

    let small = write_coloring(dir.path(), "small.txt", 3, &[1, 2, 3, 1, 2, 3, 1, 2, 3, 1]);
    let (code, out, _) = run(&["construct", "--coloring", &small, "--y-max", "1", "--size-floor", "5"]);
    assert_eq!(code, 1);
    assert!(out.contains("no witness"));
}

#[test]
fn lift_exp_decodes_multiplicatively() {
    let dir = tempfile::tempdir().unwrap();
    let ones = write_coloring(dir.path(), "ones.txt", 1, &[1; 1024]);
    let (code, out, _) = run(&["lift-exp", "--coloring", &ones, "--base", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("N = 10, r = 1"));
    assert!(out.contains("schur witness (1, 1) -> (2, 2, 4) color 1"));
    let tiny = write_coloring(dir.path(), "tiny.txt", 1, &[1]);
    assert_eq!(run(&["lift-exp", "--coloring", &tiny]).0, 2);
}

#[test]
fn store_round_trip_and_quarantine() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("results.jsonl");
    let db_s = db.to_str().unwrap();
    let (code, out, _) = run(&["threshold", "--family", "schur", "--colors", "2", "--store", db_s]);
    assert_eq!(code, 0);
    assert!(out.contains("stored threshold result"));
    // the same family under another name and term order shares the entry
    let f = dir.path().join("renamed.json");
    fs::write(&f, r#"{"name":"sums","num_vars":2,"terms":["x0 + x1","x1","x0"],"distinct_required":false}"#)
        .unwrap();
    let (code, out, _) = run(&["threshold", "--family", f.to_str().unwrap(), "--colors", "2", "--store", db_s]);
    assert_eq!(code, 0);
    assert!(out.contains("source: store"), "{out}");
    assert!(out.contains("T = 5"));

    let (code, out, _) = run(&["avoid", "--family", "schur", "--colors", "2", "--n", "4", "--store", db_s]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = run(&[
        "cache", "lookup", "--kind", "avoiding", "--family", "schur", "--params", r#"{"n":4,"r":2}"#, "--store", db_s,
    ]);
    assert_eq!(code, 0, "{out}");
    let (code, _, _) = run(&[
        "cache", "lookup", "--kind", "avoiding", "--family", "schur", "--params", r#"{"n":3,"r":2}"#, "--store", db_s,
    ]);
    assert_eq!(code, 1);

    let text = fs::read_to_string(&db).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let tampered = lines[1].replacen("[2,2]", "[1,2]", 1);
    assert_ne!(tampered, lines[1]);
    fs::write(&db, format!("{}\n{}\n", lines[0], tampered)).unwrap();
    let (code, out, _) = run(&["cache", "verify", "--store", db_s]);
    assert_eq!(code, 1);
    assert!(out.contains("quarantined line 2"), "{out}");
    let report = Store::open(&db).load().unwrap();
    assert_eq!(report.records.len(), 1);
    assert_eq!(report.records[0].kind, Kind::Threshold);
    let (code, out, _) = run(&["cache", "list", "--store", db_s]);
    assert_eq!(code, 0);
    assert!(out.contains("records: 1"));
}

#[test]
fn single_worker_output_is_reproducible() {
    let args = ["threshold", "--family", "schur", "--colors", "3", "--max-n", "20"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a, b);
    assert!(a.1.contains("T = 14"));
    let par = run(&["threshold", "--family", "schur", "--colors", "3", "--max-n", "20", "--jobs", "4"]);
    assert!(par.1.contains("T = 14"));
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_monochrome");
    let ok = Command::new(bin).args(["threshold", "--family", "schur", "--colors", "2"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("T = 5"));
    let bad = Command::new(bin).arg("nonsense").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
