use std::path::Path;
use std::process::{Command, Output};

fn hopflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopflab")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn selftest_passes() {
    let o = hopflab(&["selftest"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn unknown_map_lists_the_registry() {
    let o = hopflab(&["dilation", "--map", "no-such-map", "--k", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("no-such-map") && err.contains("i∘hopf") && err.contains("cone:hopf"), "{err}");
}

#[test]
fn bad_flags_exit_one() {
    assert_eq!(hopflab(&["dilation", "--k", "2"]).status.code(), Some(1));
    assert_eq!(hopflab(&["dilation", "--map", "hopf", "--k", "9"]).status.code(), Some(1));
    assert_eq!(hopflab(&["--help"]).status.code(), Some(0));
}

#[test]
fn hopf_map_has_vanishing_three_dilation() {
    let o = hopflab(&["dilation", "--map", "hopf", "--k", "3", "--samples", "2000", "--relation", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert!(v["report"]["dilation"]["sup_estimate"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["report"]["relation"]["holds"], true);
    assert_eq!(v["command"], "dilation");
}

#[test]
fn reports_are_reproducible_across_thread_counts() {
    let args = ["dilation", "--map", "i∘hopf", "--k", "2", "--samples", "3000", "--seed", "17"];
    let a = hopflab(&args);
    let b = hopflab(&[&args[..], &["--threads", "1"]].concat());
    let c = hopflab(&[&args[..], &["--threads", "3"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let other = hopflab(&["dilation", "--map", "i∘hopf", "--k", "2", "--samples", "3000", "--seed", "18"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn mesh_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s3.json");
    let o = hopflab(&["mesh", "--sphere-dim", "3", "--level", "1", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let c = hopflab::mesh::load_mesh(&path).unwrap();
    assert_eq!(c, hopflab::mesh::gen_sphere(3, 1).unwrap());
    assert!(stderr(&o).contains(c.checksum()));

    let o = hopflab(&["mesh", "--level", "0", "--steps", "2"]);
    assert!(o.status.success());
    let p = hopflab::mesh::SimplicialComplex::from_json_str(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(p.dim(), 4);
}

#[test]
fn missing_config_reports_the_path() {
    let missing = Path::new("/nonexistent/sweep.json");
    let o = hopflab(&["construct", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/sweep.json"), "{}", stderr(&o));
}

#[test]
fn config_rejects_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.json");
    std::fs::write(&path, r#"{"deltas": [0.1], "bogus": 1}"#).unwrap();
    let o = hopflab(&["construct", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));
}

#[test]
fn small_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let o = hopflab(&["construct", "--deltas", "0.2", "--samples", "500", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("delta,"));
    assert_eq!(json(&o)["report"]["rows"][0]["delta"], 0.2);
}

#[test]
fn hopf_command_with_oracle() {
    let o = hopflab(&["hopf", "--level", "1", "--oracle", "hopf"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["report"]["oracle"]["linking"], 1);
    let h = v["report"]["hopf"]["value"].as_f64().unwrap();
    assert!(h > 0.5 && h < 1.1, "{h}");
}
