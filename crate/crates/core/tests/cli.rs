use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qest")).args(args).output().expect("spawn qest")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(2).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn schema_valid(doc: &Value) -> bool {
    let schema: Value = serde_json::from_str(qest::output::JSON_SCHEMA).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    compiled.is_valid(doc)
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(qest(&["--help"]).status.code(), Some(0));
    assert_eq!(qest(&["--version"]).status.code(), Some(0));
    assert_eq!(qest(&["qfi", "--help"]).status.code(), Some(0));
}

#[test]
fn invalid_arguments_exit_two() {
    for args in [
        vec!["qfi"],
        vec!["qfi", "--K", "2"],
        vec!["qfi", "--K", "2", "--delta", "-0.5"],
        vec!["qfi", "--K-range", "5:2", "--delta", "1"],
        vec!["qfi", "--K", "2", "--delta-grid", "1:0:4"],
        vec!["qfi", "--K", "2", "--delta", "1", "--format", "xml"],
        vec!["qfi", "--K", "2", "--delta", "1", "--state", "fpn"],
        vec!["qfi", "--K", "2", "--delta", "1", "--jobs", "0"],
        vec!["anneal", "--K", "2", "--delta", "0.3", "--cooling", "1.5"],
        vec!["figure", "fig12"],
        vec!["frobnicate"],
    ] {
        let o = qest(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty(), "{args:?} printed data");
    }
}

#[test]
fn missing_input_file_is_io_error() {
    let o = qest(&["tradeoff", "--K", "2", "--delta", "1", "--povm", "/nonexistent/povm.json"]);
    assert_eq!(o.status.code(), Some(1));
    let o = qest(&["qfi", "--state", "fpn", "--amplitudes", "/nonexistent/a.json", "--delta", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn qfi_examples() {
    let o = qest(&["qfi", "--state", "hb", "--K", "2", "--delta", "0", "--method", "small"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# qest-csv v1 command=qfi\nK,delta,method,h11,h22,h12,valid_flag\n"));
    let r = &data_rows(&text)[0];
    assert_eq!((num(&r[3]), num(&r[4])), (12.0, 12.0));

    let o = qest(&["qfi", "--state", "hb", "--K", "1", "--delta", "0.5", "--method", "exact"]);
    let r = &data_rows(&stdout(&o))[0];
    assert!((num(&r[3]) - 4.0 * (-1.0f64).exp()).abs() < 1e-12);

    let o = qest(&["qfi", "--K", "25", "--delta", "1.0"]);
    let r = &data_rows(&stdout(&o))[0];
    assert!(num(&r[3]) > 0.0 && num(&r[4]) > 0.0 && r[6] == "true");
}

#[test]
fn tradeoff_examples() {
    let o = qest(&["tradeoff", "--K", "1", "--delta", "0.3", "--povm", "canonical"]);
    assert!((num(&data_rows(&stdout(&o))[0][4]) - 1.0).abs() < 1e-9);
    let o = qest(&["tradeoff", "--K", "1500", "--delta", "1", "--method", "large", "--povm", "large-optimal"]);
    assert!((num(&data_rows(&stdout(&o))[0][4]) - 1.97).abs() < 0.005);
}

#[test]
fn povm_and_amplitude_files() {
    let dir = tempfile::tempdir().unwrap();
    let povm = dir.path().join("povm.json");
    let r = 0.5f64.sqrt();
    std::fs::write(&povm, format!("[[[{r},0],[{r},0]],[[{r},0],[-{r},0]]]")).unwrap();
    let o = qest(&["tradeoff", "--K", "1", "--delta", "0.7", "--povm", povm.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!((num(&data_rows(&stdout(&o))[0][4]) - 1.0).abs() < 1e-9);

    let amps = dir.path().join("amps.json");
    std::fs::write(&amps, "[[0.6,0],[0,0],[0,0.8]]").unwrap();
    let o = qest(&["qfi", "--state", "fpn", "--amplitudes", amps.to_str().unwrap(), "--delta", "0.4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows[0][0], "1");

    std::fs::write(&amps, "[[0.6,0],[0,0]]").unwrap();
    let o = qest(&["qfi", "--state", "fpn", "--amplitudes", amps.to_str().unwrap(), "--delta", "0.4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_output_matches_schema() {
    for args in [
        vec!["qfi", "--K-range", "1:3", "--delta-grid", "0.1:1:3", "--format", "json"],
        vec!["tradeoff", "--K", "2,3", "--delta", "0.5", "--format", "json"],
        vec!["validity", "--K", "2", "--format", "json"],
        vec!["anneal", "--K", "2", "--delta", "0.3", "--steps", "10", "--levels", "5", "--format", "json"],
    ] {
        let o = qest(&args);
        assert_eq!(o.status.code(), Some(0));
        let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(schema_valid(&doc), "{args:?}");
        assert_eq!(doc["columns"].as_array().unwrap().len(), doc["rows"][0].as_object().unwrap().len());
    }
    let bad = serde_json::json!({"format": "qest", "version": 2, "command": "qfi", "columns": ["K"], "rows": []});
    assert!(!schema_valid(&bad));
}

#[test]
fn failed_run_leaves_existing_file_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let o = qest(&["qfi", "--K", "2", "--delta", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let before = std::fs::read(&out).unwrap();
    let o = qest(&["qfi", "--K", "2", "--delta", "0.5", "--method", "large", "--delta", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(std::fs::read(&out).unwrap(), before);
    let fresh = dir.path().join("never.csv");
    qest(&["qfi", "--K", "2", "--delta", "bad", "--out", fresh.to_str().unwrap()]);
    assert!(!fresh.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn unwritable_output_is_io_error() {
    let o = qest(&["qfi", "--K", "2", "--delta", "0.5", "--out", "/nonexistent-dir/x/out.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let p = dir.join(name);
    let mut a: Vec<&str> = args.to_vec();
    let ps = p.to_str().unwrap().to_string();
    a.extend(["--out", &ps]);
    let o = qest(&a);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(&p).unwrap()
}

#[test]
fn job_count_never_changes_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let qfi = ["qfi", "--K-range", "1:6", "--delta-grid", "0.05:1.5:5"];
    let a = run_to(dir.path(), "a", &[&qfi[..], &["--jobs", "1"]].concat());
    let b = run_to(dir.path(), "b", &[&qfi[..], &["--jobs", "3"]].concat());
    assert_eq!(a, b);

    let ann = ["anneal", "--K", "2,3", "--delta", "0.2,0.4", "--steps", "20", "--levels", "10", "--seed", "5"];
    let a = run_to(dir.path(), "c", &[&ann[..], &["--jobs", "1"]].concat());
    let b = run_to(dir.path(), "d", &[&ann[..], &["--jobs", "4"]].concat());
    let c = run_to(dir.path(), "e", &[&ann[..], &["--jobs", "4"]].concat());
    assert_eq!(a, b);
    assert_eq!(b, c);
}

#[test]
fn anneal_writes_history() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("hist.csv");
    let o = qest(&[
        "anneal", "--K", "1", "--delta", "0.2", "--steps", "20", "--levels", "10", "--restarts", "2", "--history",
        h.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = &data_rows(&stdout(&o))[0];
    assert!((num(&r[2]) - 1.0).abs() < 1e-3);
    assert_eq!(r[3], (2 + 2 * (1 + 20 * 10)).to_string());
    let hist = std::fs::read_to_string(&h).unwrap();
    assert!(hist.starts_with("# qest-csv v1 command=anneal-history\nK,delta,evaluation,value\n"));
}

#[test]
fn figure_bundle_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig10");
    let o = qest(&["figure", "fig10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["figure"], "fig10");
    assert_eq!(manifest["tables"][0]["rows"], 1000);
    let csv = std::fs::read_to_string(out.join("fig10.csv")).unwrap();
    let last = data_rows(&csv).pop().unwrap();
    assert_eq!(last[0], "1000");
    assert!((num(&last[1]) - 0.49).abs() < 0.005);
}
