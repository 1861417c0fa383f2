use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn subdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subdiv")).args(args).env("SUBDIV_THREADS", "2").output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_then_verify_on_a_complete_host() {
    let dir = tempfile::tempdir().unwrap();
    let (host, arc, cert) = (dir.path().join("k200.dg"), dir.path().join("arc.dg"), dir.path().join("cert.json"));
    assert!(subdiv(&["--out", p(&host), "gen", "--kind", "complete", "--n", "200"]).status.success());
    fs::write(&arc, "2 1\n0 1\n").unwrap();
    let o = subdiv(&["--out", p(&cert), "solve", "--mode", "spanning", "--pattern", p(&arc), "--input", p(&host)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("stage="));
    let o = subdiv(&["verify", "--cert", p(&cert), "--input", p(&host), "--pattern", "arc"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = subdiv(&["verify", "--cert", p(&cert), "--input", p(&host), "--pattern", "2-cycle"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn tampered_and_foreign_certificates_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (host, cert) = (dir.path().join("h.dg"), dir.path().join("c.json"));
    assert!(subdiv(&["--seed", "3", "--out", p(&host), "gen", "--kind", "random", "--n", "9"]).status.success());
    let o = subdiv(&["--out", p(&cert), "oracle", "--pattern", "arc", "--input", p(&host)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(subdiv(&["verify", "--cert", p(&cert), "--input", p(&host)]).status.success());

    let mut j: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    let route = j["paths"][0]["route"].as_array_mut().unwrap();
    let mid = route.len() / 2;
    route.swap(mid, mid + 1);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, j.to_string()).unwrap();
    let o = subdiv(&["verify", "--cert", p(&bad), "--input", p(&host)]);
    assert_eq!(o.status.code(), Some(4));

    let other = dir.path().join("other.dg");
    fs::write(&other, "9 0\n").unwrap();
    let o = subdiv(&["verify", "--cert", p(&cert), "--input", p(&other)]);
    assert_ne!(o.status.code(), Some(0));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn tightness_witness_exits_with_a_solver_stage() {
    let dir = tempfile::tempdir().unwrap();
    let host = dir.path().join("t.dg");
    assert!(subdiv(&["--out", p(&host), "gen", "--kind", "tightness", "--n", "40"]).status.success());
    let o = subdiv(&["solve", "--pattern", "arc", "--input", p(&host)]);
    assert_eq!(o.status.code(), Some(3));
    let e = stderr(&o);
    assert!(e.contains("path-cover") || e.contains("hall-violation"), "{e}");
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let host = dir.path().join("bad.dg");
    fs::write(&host, "3 2\n0 1\n").unwrap();
    assert_eq!(subdiv(&["solve", "--pattern", "arc", "--input", p(&host)]).status.code(), Some(2));
    assert_eq!(subdiv(&["solve", "--pattern", "arc", "--input", "/nonexistent.dg"]).status.code(), Some(2));
    fs::write(&host, "4 4\n0 1\n1 0\n2 3\n3 2\n").unwrap();
    assert_eq!(subdiv(&["solve", "--mode", "tiling", "--pattern", "arc", "--input", p(&host)]).status.code(), Some(2));
    let params = dir.path().join("params.json");
    fs::write(&params, r#"{"eps": 2.0}"#).unwrap();
    assert_eq!(subdiv(&["--params", p(&params), "solve", "--pattern", "arc", "--input", p(&host)]).status.code(), Some(2));
    assert_eq!(subdiv(&["solve", "--pattern", "arc"]).status.code(), Some(2));
}

#[test]
fn planted_instance_classifies_and_solves() {
    let dir = tempfile::tempdir().unwrap();
    let (host, cert) = (dir.path().join("p.dg"), dir.path().join("t.json"));
    let o = subdiv(&["--seed", "4", "--out", p(&host), "gen", "--kind", "planted", "--class", "ec3", "--n", "120"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let truth: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("p.dg.json")).unwrap()).unwrap();
    assert_eq!(truth["kind"], "EC3");
    let o = subdiv(&["classify", "--input", p(&host)]);
    assert!(o.status.success());
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["report"]["verdict"], "extremal");
    assert_eq!(j["partition"]["kind"], "EC3");
    let o = subdiv(&[
        "--seed", "1", "--out", p(&cert), "solve", "--mode", "tiling", "--orders", "60,60", "--pattern", "2-cycle", "--input", p(&host),
        "--force-extremal", "ec3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("route=EC3"));
    assert!(subdiv(&["verify", "--cert", p(&cert), "--input", p(&host)]).status.success());
}

#[test]
fn oracle_reports_infeasible_instances() {
    let dir = tempfile::tempdir().unwrap();
    let host = dir.path().join("t.dg");
    assert!(subdiv(&["--out", p(&host), "gen", "--kind", "tightness", "--n", "8"]).status.success());
    let o = subdiv(&["oracle", "--pattern", "2-cycle", "--input", p(&host)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("infeasible"));
}

#[test]
fn experiment_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"seed": 11, "rows": [
            {"generator": {"kind": "random", "n": 7}, "pattern": "arc", "repeats": 4},
            {"generator": {"kind": "complete", "n": 30}, "pattern": "2-cycle", "orders": [10, 20]}]}"#,
    )
    .unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let oa = subdiv(&["--out", p(&a), "experiment", "--config", p(&cfg)]);
    let ob = subdiv(&["--out", p(&b), "experiment", "--config", p(&cfg)]);
    assert!(oa.status.success() && ob.status.success(), "{}", stderr(&oa));
    let hash = |o: &Output| stderr(o).lines().find(|l| l.contains("hash=")).unwrap().to_string();
    assert_eq!(hash(&oa), hash(&ob));
    let csv = fs::read_to_string(&a).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "instance,seed,generator,n,pattern,mode,route,outcome,stage,verdict,oracle,wall_ms");
    assert_eq!(lines.count(), 5);
    assert!(dir.path().join("a.csv.json").exists());

    let empty = dir.path().join("empty.json");
    fs::write(&empty, "{}").unwrap();
    let o = subdiv(&["experiment", "--config", p(&empty)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 1);
}
