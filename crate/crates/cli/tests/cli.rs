use std::process::{Command, Output};

use serde_json::Value;

fn twext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twext")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn trailer(o: &Output) -> Value {
    let err = String::from_utf8_lossy(&o.stderr);
    let line = err.lines().find_map(|l| l.strip_prefix("twext-error: ")).expect("machine-readable trailer");
    serde_json::from_str(line).unwrap()
}

#[test]
fn u_duality_scenario_prints_groups() {
    let o = twext(&["scenario", "run", "u-duality-su8"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let groups: Vec<&str> = out.lines().filter_map(|l| l.trim().strip_prefix("stem ")).collect();
    assert_eq!(groups, ["0: ℤ", "1: 0", "2: 0", "3: 0", "4: ℤ²", "5: ℤ/2"]);
}

#[test]
fn corrupted_fixture_fails_validation() {
    let o = twext(&["module", "validate", "corrupted-sq1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(trailer(&o)["code"], 1);
    assert!(stdout(&o).contains("Sq1*Sq1"));
}

#[test]
fn resolve_beyond_truncation_is_malformed() {
    let o = twext(&["resolve", "w1", "--max-t", "20"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(trailer(&o)["kind"], "beyond-truncation");
}

#[test]
fn unknown_preset_and_bad_json_exit_2() {
    assert_eq!(twext(&["module", "validate", "no-such-module"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"format": 1, "kind": "module", "name": "x""#).unwrap();
    let o = twext(&["module", "validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(trailer(&o)["kind"], "json");
}

#[test]
fn truncated_module_file_names_missing_field() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("m.json");
    std::fs::write(
        &f,
        r#"{"format": 1, "kind": "module", "name": "x", "algebra": "a1", "truncation": null,
            "basis": [["a", 0], ["b", 1]], "actions": [{"generator": "Sq1", "source": "a"}]}"#,
    )
    .unwrap();
    let o = twext(&["module", "validate", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let t = trailer(&o);
    let msg = t["message"].as_str().unwrap();
    assert!(msg.contains("actions[0]") && msg.contains("target"), "{msg}");
}

#[test]
fn resume_matches_fresh_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let small = dir.path().join("small.json");
    let o = twext(&["twist", "apply", "su8-cohomology", "--target", "ko", "--class", "b=beta", "--out", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = m.to_str().unwrap();
    let o = twext(&["resolve", m, "--max-s", "3", "--max-t", "4", "--out", small.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let resumed = twext(&["chart", m, "--resume", small.to_str().unwrap(), "--max-s", "6", "--max-t", "6", "--format", "json"]);
    let fresh = twext(&["chart", m, "--max-s", "6", "--max-t", "6", "--format", "json"]);
    assert_eq!(resumed.status.code(), Some(0));
    assert_eq!(stdout(&resumed), stdout(&fresh));
}

#[test]
fn resume_rejects_other_module() {
    let dir = tempfile::tempdir().unwrap();
    let save = dir.path().join("r.json");
    assert_eq!(twext(&["resolve", "c-eta", "--max-s", "2", "--max-t", "6", "--out", save.to_str().unwrap()]).status.code(), Some(0));
    let o = twext(&["resolve", "a1-seagull", "--max-t", "6", "--resume", save.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(trailer(&o)["kind"], "hash-mismatch");
}

#[test]
fn prime_flag_is_enforced() {
    let o = twext(&["algebra", "info", "atmf", "--prime", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(twext(&["algebra", "info", "atmf", "--prime", "3"]).status.code(), Some(0));
}

#[test]
fn module_combinators_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let cyc = dir.path().join("c.json");
    let o = twext(&["module", "cyclic", "a1", "--annihilators", "Sq1", "--out", cyc.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let sum = twext(&["module", "sum", cyc.to_str().unwrap(), "a1-seagull"]);
    let v: Value = serde_json::from_slice(&sum.stdout).unwrap();
    assert_eq!(v["basis"].as_array().unwrap().len(), 8);
    let susp = twext(&["module", "suspend", "a1-seagull", "--by", "-2"]);
    let v: Value = serde_json::from_slice(&susp.stdout).unwrap();
    assert_eq!(v["min_degree"], -2);
    let t = twext(&["module", "tensor", "a1-seagull", "a1-seagull"]);
    let v: Value = serde_json::from_slice(&t.stdout).unwrap();
    assert_eq!(v["basis"].as_array().unwrap().len(), 16);
}

#[test]
fn lescheck_passes_on_preset() {
    let o = twext(&["lescheck", "atmf-cnu-ses", "--max-s", "4", "--max-t", "16"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn chart_formats_agree_on_total_rank() {
    let svg = stdout(&twext(&["chart", "c-eta", "--max-s", "4", "--max-t", "10", "--format", "svg"]));
    let json: Value = serde_json::from_slice(&twext(&["chart", "c-eta", "--max-s", "4", "--max-t", "10", "--format", "json"]).stdout).unwrap();
    let total: u64 = json["ranks"].as_array().unwrap().iter().map(|r| r[2].as_u64().unwrap()).sum();
    assert_eq!(svg.matches("<circle").count() as u64, total);
}

#[test]
fn sequential_threads_give_same_chart() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_twext"))
            .env("TWEXT_THREADS", threads)
            .args(["chart", "w3", "--max-s", "5", "--format", "json"])
            .output()
            .unwrap()
    };
    let a = run("1");
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, run("4").stdout);
}
