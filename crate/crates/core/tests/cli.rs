use std::fs;
use std::path::Path;
use std::process::Command;

fn wtrace(dir: &Path, args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_wtrace")).current_dir(dir).args(args).output().unwrap().status.code().unwrap()
}

fn report(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn kernel_check_defaults_pass() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(wtrace(d.path(), &["kernel-check", "--out", "o"]), 0);
    let r = report(&d.path().join("o"), "kernel-check.json");
    assert_eq!(r["schema_version"], wtrace::SCHEMA_VERSION);
    assert_eq!(r["passed"], true);
    let entries = r["result"].as_array().unwrap();
    // x1 in {0.1, 0.5, 1, 2}; n = 1: mass + 2 moments, n = 2: mass + 5 moments
    assert_eq!(entries.len(), 4 * 3 + 4 * 6);
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    fs::write(p.join("empty.toml"), "[battery]\nsize = 0\n").unwrap();
    assert_eq!(wtrace(p, &["trace-check", "--config", "empty.toml"]), 2);
    fs::write(p.join("theta.toml"), "[params]\ntheta = 2.5\n").unwrap();
    assert_eq!(wtrace(p, &["norms", "--config", "theta.toml"]), 2);
    fs::write(p.join("typo.toml"), "[grid]\ncell = 8\n").unwrap();
    assert_eq!(wtrace(p, &["norms", "--config", "typo.toml"]), 2);
    assert_eq!(wtrace(p, &["norms", "--config", "missing.toml"]), 2);
    assert_eq!(wtrace(p, &["frobnicate"]), 2);
    fs::write(p.join("tight.toml"), "[tolerances]\nkernel = 1e-14\n").unwrap();
    assert_eq!(wtrace(p, &["kernel-check", "--config", "tight.toml", "--out", "t"]), 3);
    let r = report(&p.join("t"), "kernel-check.json");
    assert_eq!(r["passed"], false);
    assert!(!r["failures"].as_array().unwrap().is_empty());
}

#[test]
fn boundary_csv_feeds_extend() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(wtrace(p, &["boundary-norms", "--out", "b"]), 0);
    assert!(p.join("b/boundary/g0.csv.meta.json").exists());
    let header = fs::read_to_string(p.join("b/boundary/g0.csv")).unwrap();
    assert!(header.starts_with("t,x',value"));
    fs::write(p.join("in.toml"), "[io]\nboundary_input = \"b/boundary/g0.csv\"\n[grid]\ncells = 16\n").unwrap();
    assert_eq!(wtrace(p, &["extend", "--config", "in.toml", "--out", "e"]), 0);
    let r = report(&p.join("e"), "extend.json");
    let e = &r["result"]["entries"][0];
    assert_eq!(e["label"], "input");
    assert!(e["trace_error"].as_f64().unwrap() < 1e-3);
}

#[test]
fn bvp_manufactured_slopes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(wtrace(d.path(), &["bvp", "--out", "o"]), 0);
    let r = report(&d.path().join("o"), "bvp.json");
    let dx = r["result"]["space"]["slope"].as_f64().unwrap();
    let dt = r["result"]["time"]["slope"].as_f64().unwrap();
    assert!((dx - 2.0).abs() < 0.1 && (dt - 1.0).abs() < 0.1, "{dx} {dt}");
}
