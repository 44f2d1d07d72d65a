use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn vmsdg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vmsdg")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn list_prints_ten_experiments_in_order() {
    let o = vmsdg(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let ids: Vec<_> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(ids, ["E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8", "E9", "E10"]);
}

#[test]
fn run_e1_writes_artifacts_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e1");
    let o = vmsdg(&["run", "--experiment", "E1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r = report(&out);
    for key in ["experiment", "config_echo", "diagnostics", "checks", "notes"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    let check = &r["checks"][0];
    assert_eq!(check["name"], "nodal_exactness");
    assert_eq!(check["pass"], true);
    assert!(check["value"].as_f64().unwrap() <= 1e-10);
    assert!(!r["notes"].as_array().unwrap().is_empty());
    let csv = std::fs::read_to_string(out.join("solution.csv")).unwrap();
    assert!(csv.starts_with("run,element,side,x,u_exact,u_coarse,u_fine\n"));
    assert!(!csv.contains('\r'));
}

#[test]
fn failing_checks_exit_with_one() {
    let o = vmsdg(&["run", "--experiment", "E2", "--override", "boundary_values=[0, 0.5]"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("[FAIL]"));
}

#[test]
fn model_mismatch_exits_with_two() {
    let o = vmsdg(&["run", "--experiment", "E1", "--override", "interface_model=upwind"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mismatch"));
    let o = vmsdg(&["run", "--experiment", "E1", "--override", "no_such_key=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn overrides_reach_the_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e4");
    let o = vmsdg(&[
        "run",
        "--experiment",
        "e4",
        "--out",
        out.to_str().unwrap(),
        "--override",
        "eta=4",
        "--override",
        "samples=3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r = report(&out);
    assert_eq!(r["config_echo"]["eta"], 4.0);
    assert_eq!(r["config_echo"]["samples"], 3);
}

#[test]
fn solve_runs_a_config_file_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(
        &cfg,
        r#"{"operator": "advection_diffusion", "a": 0.5, "nu": 0.15, "forcing": "6",
            "domain": [0, 1], "boundary_values": [0, 2], "elements": 5, "order": 2,
            "interface_model": "interior_penalty_upwind", "eta": 3, "samples": 7}"#,
    )
    .unwrap();
    let mut artifacts = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = vmsdg(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        artifacts
            .push((std::fs::read(out.join("solution.csv")).unwrap(), std::fs::read(out.join("report.json")).unwrap()));
    }
    assert_eq!(artifacts[0], artifacts[1]);
    let r = report(&dir.path().join("a"));
    assert_eq!(r["experiment"], "custom");
    assert_eq!(r["config_echo"]["order"], 2);
}

#[test]
fn solve_rejects_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let missing = dir.path().join("missing.json");
    let o = vmsdg(&["solve", "--config", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"order\": ").unwrap();
    let o = vmsdg(&["solve", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn schema_lists_every_config_key() {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/experiment_config.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let props = schema["properties"].as_object().unwrap();
    let cfg = serde_json::to_value(vmsdg_core::runner::ExperimentConfig::preset(vmsdg_core::runner::ExperimentId::E10))
        .unwrap();
    let mut keys: Vec<_> = cfg.as_object().unwrap().keys().cloned().collect();
    let mut listed: Vec<_> = props.keys().cloned().collect();
    keys.sort();
    listed.sort();
    assert_eq!(keys, listed);
    for key in ["experiment", "operator", "diagonal", "interface_model", "volumetric_model"] {
        let allowed = props[key]["enum"].as_array().unwrap();
        assert!(allowed.contains(&cfg[key]), "{key} value {} not in schema", cfg[key]);
    }
}
