use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn weights(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../weights").join(name)
}

fn run(args: &[&str], weight: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biorth"))
        .arg("--weight")
        .arg(weight)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn lebesgue_verify_all_passes() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["--cmd", "verify-all", "--n", "8"], &weights("lebesgue.json"), d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(rep["schema"], "v1");
    assert_eq!(rep["all_pass"], true);
    assert!(rep["notes"][0].as_str().unwrap().contains("raw-moments"));
}

#[test]
fn strict_verify_all_passes_and_is_deterministic() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let a = run(&["--cmd", "verify-all", "--n", "4", "--seed", "11"], &weights("strict.json"), d1.path());
    let b = run(&["--cmd", "verify-all", "--n", "4", "--seed", "11"], &weights("strict.json"), d2.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(b.status.code(), Some(0));
    let ra = std::fs::read(d1.path().join("report.json")).unwrap();
    let rb = std::fs::read(d2.path().join("report.json")).unwrap();
    assert_eq!(ra, rb);
    let rep: serde_json::Value = serde_json::from_slice(&ra).unwrap();
    let ids: Vec<&str> = rep["suites"][0]["entries"].as_array().unwrap().iter().map(|e| e["anchor"].as_str().unwrap()).collect();
    assert!(ids.iter().all(|a| a.contains(':')));
}

#[test]
fn impossible_tolerance_is_an_identity_failure() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["--cmd", "assoc", "--n", "4", "--tol", "1e-30"], &weights("laurent_moments.json"), d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn malformed_json_reports_position() {
    let d = tempfile::tempdir().unwrap();
    let w = write(d.path(), "bad.json", "{\n  \"moments\": [[0, 1, 0],\n}");
    let o = run(&["--cmd", "build"], &w, d.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("line 3"), "{e}");
    assert!(e.contains("column"), "{e}");
}

#[test]
fn ambiguous_spec_is_structural() {
    let d = tempfile::tempdir().unwrap();
    let w = write(d.path(), "both.json", r#"{"moments":[[0,1,0]],"singularities":[{"z":[0,0],"rho":[-1,0]}]}"#);
    let o = run(&["--cmd", "build"], &w, d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("exactly one"));
}

#[test]
fn short_moment_window_names_requirement() {
    let d = tempfile::tempdir().unwrap();
    let w = write(d.path(), "short.json", r#"{"moments":[[0,1,0]],"window":3}"#);
    let o = run(&["--cmd", "build", "--n", "5"], &w, d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("need K >= 6"), "{}", stderr(&o));
}

#[test]
fn degenerate_weight_is_an_existence_error() {
    let d = tempfile::tempdir().unwrap();
    let w = write(d.path(), "degenerate.json", r#"{"moments":[[-1,1,0],[0,1,0],[1,1,0]],"window":41}"#);
    let o = run(&["--cmd", "build", "--n", "40"], &w, d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("does not exist at level 2"), "{}", stderr(&o));
}

#[test]
fn semi_classical_commands_refuse_raw_moments() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["--cmd", "coeffs"], &weights("lebesgue.json"), d.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["--cmd", "deform"], &weights("strict.json"), d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--trajectory"));
}

#[test]
fn deform_writes_flow_table() {
    let d = tempfile::tempdir().unwrap();
    let traj = weights("trajectory.json");
    let o = run(
        &["--cmd", "deform", "--n", "1", "--steps", "16", "--samples", "5", "--trajectory", traj.to_str().unwrap()],
        &weights("strict.json"),
        d.path(),
    );
    // the exit code reflects identity outcomes; structural errors would be 2
    assert_ne!(o.status.code(), Some(2), "{}", stderr(&o));
    let csv = std::fs::read_to_string(d.path().join("flow.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5);
    assert!(csv.starts_with("n,t,kappa_re"));
}

#[test]
fn moments_and_heine() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["--cmd", "moments", "--n", "6"], &weights("laurent.json"), d.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.path().join("moments.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("1,1")));
    let o = run(&["--cmd", "heine-check", "--n", "3"], &weights("strict.json"), d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}
