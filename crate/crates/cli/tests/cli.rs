use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn spec(name: &str) -> String {
    root().join("specs").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parfwd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 output")
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).expect("golden file")
}

fn json_lines(o: &Output) -> Vec<Value> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).expect("one JSON record per line"))
        .collect()
}

#[test]
fn region_matches_golden() {
    let o = run(&["region", &spec("protocol_b.spec")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("region_protocol_b.txt"));
}

#[test]
fn constraints_match_golden() {
    let o = run(&["constraints", &spec("single_relay_df.spec")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("constraints_single_relay_df.txt"));
}

#[test]
fn cutset_matches_golden() {
    let o = run(&["cutset", &spec("short_range_k3.spec")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("cutset_short_range_k3.txt"));
}

#[test]
fn capacity_check_matches_golden() {
    let o = run(&["capacity-check", &spec("protocol_b.spec")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text, golden("capacity_protocol_b.txt"));
    assert!(text.ends_with("capacity verified: 3/3 cuts\n"));
}

#[test]
fn capacity_check_fails_when_depth_is_too_small() {
    let o = run(&["capacity-check", &spec("protocol_b.spec"), "--depth", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("capacity not verified"));
}

#[test]
fn simulate_matches_golden() {
    let o = run(&["simulate", &spec("multihop_k2.spec"), "--seed", "3", "--blocks", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("simulate_multihop_k2.txt"));
}

#[test]
fn simulate_is_reproducible_and_seed_dependent() {
    let args = |seed: &'static str| ["simulate", "--seed", seed, "--blocks", "5"];
    let path = spec("short_range_k2.spec");
    let a = run(&[&args("7")[..], &[path.as_str()]].concat());
    let b = run(&[&args("7")[..], &[path.as_str()]].concat());
    let c = run(&[&args("8")[..], &[path.as_str()]].concat());
    assert_eq!(stdout(&a), stdout(&b));
    assert_ne!(stdout(&a), stdout(&c));
}

#[test]
fn simulate_requires_blocks_beyond_tree_depth() {
    let o = run(&["simulate", &spec("multihop_k2.spec"), "--blocks", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tree depth"));
}

#[test]
fn simulate_requires_sizes() {
    let o = run(&["simulate", &spec("coupled_k3.spec")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no sizes section"));
}

#[test]
fn validate_reports_invalid_spec() {
    let o = run(&["validate", &spec("invalid/decoding_sets_invalid.spec")]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert_eq!(text, golden("validate_invalid.txt"));
    assert!(text.contains("m[1,2]"));
}

#[test]
fn validate_accepts_valid_spec() {
    let o = run(&["validate", &spec("decoding_sets_valid.spec")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("valid\n"));
}

#[test]
fn region_of_invalid_spec_is_an_engine_error() {
    let o = run(&["region", &spec("invalid/decoding_sets_invalid.spec")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn empty_file_is_a_parse_error() {
    let dir = std::env::temp_dir().join(format!("parfwd-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("empty.spec");
    std::fs::write(&path, "").unwrap();
    let o = run(&["region", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing network section"));
}

#[test]
fn missing_file_is_a_read_error() {
    let o = run(&["validate", "no/such/file.spec"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no/such/file.spec"));
}

#[test]
fn gaussian_requires_gaussian_section() {
    let o = run(&["gaussian", &spec("multihop_k3.spec")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no gaussian section"));
}

#[test]
fn gaussian_reports_both_protocols() {
    let o = run(&["--format", "json", "gaussian", &spec("protocol_b.spec"), "--grid", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let records = json_lines(&o);
    assert_eq!(records.len(), 3);
    let a = records[0]["optimum"]["rate"].as_f64().unwrap();
    let b = records[1]["optimum"]["rate"].as_f64().unwrap();
    // The unit network with a quiet first hop: A is pinned at 0.5 by the
    // first relay, B is not.
    assert!((a - 0.5).abs() < 1e-3, "A = {a}");
    assert!(b > a + 0.2, "B = {b}");
    let margin = records[2]["margin"].as_f64().unwrap();
    assert!((margin - (b - a)).abs() < 1e-12);
}

#[test]
fn json_constraints_mark_tautologies() {
    let o = run(&["--format", "json", "constraints", &spec("protocol_b.spec")]);
    let records = json_lines(&o);
    assert_eq!(records.len(), 12);
    let tautologies = records.iter().filter(|r| r["tautology"] == true).count();
    assert_eq!(tautologies, 6);
    assert!(records
        .iter()
        .any(|r| r["terminal"] == 3 && r["subset"] == serde_json::json!(["m[1,1]"])));
}

#[test]
fn json_validate_names_the_offending_message() {
    let o = run(&["--format", "json", "validate", &spec("invalid/decoding_sets_invalid.spec")]);
    assert_eq!(o.status.code(), Some(1));
    let records = json_lines(&o);
    let last = records.last().unwrap();
    assert_eq!(last["valid"], false);
    let failing: Vec<&Value> = records.iter().filter(|r| r["passes"] == false).collect();
    assert_eq!(failing.len(), 1);
    assert_eq!(failing[0]["check"]["terminal"], 3);
    assert_eq!(failing[0]["check"]["stack_prefix"], serde_json::json!(["m[1,2]"]));
}

#[test]
fn json_capacity_summary() {
    let o = run(&["--format", "json", "capacity-check", &spec("short_range_k3.spec")]);
    assert_eq!(o.status.code(), Some(0));
    let records = json_lines(&o);
    let summary = records.last().unwrap();
    assert_eq!(summary["verified"], true);
    assert_eq!(summary["cuts"], 4);
    assert_eq!(summary["matched_cuts"], 4);
}

#[test]
fn capacity_is_not_verified_without_assumptions() {
    let o = run(&["capacity-check", &spec("multihop_k2.spec")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).ends_with("capacity not verified: 1/3 cuts\n"));
}

#[test]
fn json_simulate_has_windows_and_counting() {
    let o = run(&["--format", "json", "simulate", &spec("short_range_k2.spec"), "--blocks", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let records = json_lines(&o);
    let windows: Vec<&Value> = records.iter().filter(|r| r.get("window").is_some()).collect();
    assert_eq!(windows.len(), 3);
    for w in &windows {
        assert_eq!(w["window"][1], 4);
    }
    let counting = records.iter().filter(|r| r.get("counting").is_some()).count();
    assert_eq!(counting, 3);
}
