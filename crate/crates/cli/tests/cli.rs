use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn satclass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satclass")).args(args).env_remove("SATCLASS_OUT").output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn grid_row_two_has_seven_constants() {
    let f = fixture("unary");
    let o = satclass(&["grid", "-f", f.to_str().unwrap(), "--i", "2", "-k", "512"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["a"], "6");
    let cells = v["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 7);
    assert!(cells.iter().all(|c| [0, 1].contains(&c["constant"].as_u64().unwrap())));
}

#[test]
fn prove_prints_a_checked_derivation() {
    let f = fixture("propositional");
    let o = satclass(&["prove", "-f", f.to_str().unwrap(), "--goal", "(q)"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["provable"], true);
    assert_eq!(v["checked"], true);
    let steps = v["derivation"].as_array().unwrap();
    assert_eq!(steps.last().unwrap()["formula"], "(q)");

    let o = satclass(&["prove", "-f", f.to_str().unwrap(), "--goal", "(not p)"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["provable"], false);
}

#[test]
fn parse_errors_carry_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("s.sig");
    let thy = dir.path().join("t.thy");
    std::fs::write(&sig, "pred p 1\n").unwrap();
    std::fs::write(&thy, "theory t\n(forall v0 (p v0)\n").unwrap();
    let o = satclass(&["parse", "--signature", sig.to_str().unwrap(), "--theory", thy.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains(&format!("{}:2:", thy.display())), "{err}");

    std::fs::write(&thy, "theory t\n(forall v0 (p v0))\n").unwrap();
    let o = satclass(&["parse", "--signature", sig.to_str().unwrap(), "--theory", thy.to_str().unwrap(), "--formula", "(p c1)"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["theory"]["axioms"][0]["formula"], "(forall v0 (p v0))");
}

#[test]
fn gamma_reports_the_witness() {
    let f = fixture("unary");
    let o = satclass(&["gamma", "-f", f.to_str().unwrap(), "-k", "512", "--formula", "(forall v0 (p v0))", "-n", "1"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["holds"], true);
    let o = satclass(&["gamma", "-f", f.to_str().unwrap(), "-k", "512", "--formula", "(not (p c0))", "-n", "2"]);
    assert_eq!(json(&o)["holds"], false);

    let sig = f.join("signature.sig");
    let thy = f.join("theory.thy");
    let args = ["gamma", "--signature", sig.to_str().unwrap(), "--theory", thy.to_str().unwrap(), "--carrier", "3"];
    let o = satclass(&[&args[..], &["--formula", "(p c2)", "-n", "0"]].concat());
    let v = json(&o);
    assert_eq!(v["holds"], true);
    assert_eq!(v["carrier"], serde_json::json!([0, 1, 2]));
    assert_eq!(v["bounds"]["proof_bound"], 4096);
}

#[test]
fn run_writes_artifacts_and_check_accepts_them() {
    let f = fixture("unary");
    let out = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_satclass"))
        .args(["run", "-f", f.to_str().unwrap(), "-k", "1024", "--jobs", "1"])
        .env("SATCLASS_OUT", out.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["am.json", "grid.json", "path.json", "report.json", "truth.json"] {
        assert!(out.path().join(name).exists(), "{name}");
    }
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);

    let truth = out.path().join("truth.json");
    let grid = out.path().join("grid.json");
    let o = satclass(&["check", "-f", f.to_str().unwrap(), "-k", "1024", "--truth", truth.to_str().unwrap(), "--grid", grid.to_str().unwrap()]);
    assert!(o.status.success());

    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&truth).unwrap()).unwrap();
    doc["members"].as_array_mut().unwrap().remove(0);
    std::fs::write(&truth, doc.to_string()).unwrap();
    let o = satclass(&["check", "-f", f.to_str().unwrap(), "-k", "1024", "--truth", truth.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["passed"], false);
}

#[test]
fn failing_run_writes_a_failure_report() {
    let f = fixture("inconsistent");
    let out = tempfile::tempdir().unwrap();
    let o = satclass(&["run", "-f", f.to_str().unwrap(), "-k", "512", "-o", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["stage"], "q-check");
    assert_eq!(report["passed"], false);
    assert_eq!(report["q"]["first_failure"], 0);
}

#[test]
fn tree_prints_a_path() {
    let f = fixture("propositional");
    let o = satclass(&["tree", "-f", f.to_str().unwrap(), "-k", "256"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["path"]["universe"], 256);
}
