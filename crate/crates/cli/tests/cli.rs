use std::path::Path;
use std::process::{Command, Output};

fn formxray(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_formxray")).args(args).output().expect("binary runs")
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn passing_run_writes_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("algebra.json");
    let status = formxray(&["verify-algebra", "--n", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["command"], "verify-algebra");
    assert_eq!(r["pass"], true);
    assert_eq!(r["config"]["n"], 4);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    assert!(r["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn tolerance_failure_exits_one() {
    let out = formxray(&["gaussian-forward", "--samples", "5", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["pass"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn bad_commands_and_configs_exit_two() {
    assert_eq!(formxray(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(formxray(&["invert", "--p", "2"]).status.code(), Some(2));
    assert_eq!(formxray(&["invert-even", "--k", "2"]).status.code(), Some(2));
    assert_eq!(formxray(&["decay-check", "--s", "1.5"]).status.code(), Some(2));
    assert_eq!(formxray(&["kernel-ft-check", "--N", "63"]).status.code(), Some(2));
    let threads = Command::new(env!("CARGO_BIN_EXE_formxray"))
        .args(["verify-algebra", "--n", "2"])
        .env("FORMXRAY_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for name in ["a.json", "b.json"] {
        let path = dir.path().join(name);
        let out = formxray(&["stabilizer-average", "--samples", "500", "--seed", "4", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let mut r = report(&path);
        r["wall_time_s"] = 0.into();
        r["config"]["outputs"] = serde_json::Value::Null;
        texts.push(serde_json::to_string(&r).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn csv_profile_and_sample_dump() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("dual.csv");
    let out = formxray(&["dual-example", "--samples", "3", "--order", "30", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("r,i_plus,i_plus_numeric,i_minus,i_minus_numeric"));
    assert_eq!(text.lines().count(), 122);

    let dump = dir.path().join("samples.jsonl");
    let out = formxray(&["gaussian-forward", "--samples", "4", "--dump", dump.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&dump).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0]["frame"].as_array().unwrap().len(), 6);
    assert_eq!(lines[0]["value"].as_array().unwrap().len(), 3);
}

#[test]
fn reconstruct_point_mass_from_chain_file() {
    let dir = tempfile::tempdir().unwrap();
    let chain = dir.path().join("point.json");
    std::fs::write(&chain, r#"{"n":3,"p":0,"simplices":[{"vertices":[[0.3,0.2,-0.1]],"weight":1.0}]}"#).unwrap();
    let out = formxray(&["reconstruct-current", "--current", chain.to_str().unwrap(), "--tol", "0.02"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let direct = r["metrics"]["direct"].as_f64().unwrap();
    // e^{-|x-c|²} with c = (0.5, 0, 0)
    assert!((direct - (-0.09f64).exp()).abs() < 1e-14);
    std::fs::write(&chain, "{not json").unwrap();
    let out = formxray(&["reconstruct-current", "--current", chain.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
