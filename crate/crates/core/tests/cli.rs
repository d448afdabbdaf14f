use std::fs;
use std::path::Path;
use std::process::Command;

fn meshless(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_meshless")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_owned()
}

#[test]
fn solve_writes_tables_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"problem": "disk2d", "pe": 1, "n_target": 300, "t_final": 0.05}"#);
    let out = tmp.path().join("run");
    let o = meshless(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(header(&out.join("solution.csv")), "x,y,role,c,exact");
    assert_eq!(
        header(&out.join("steps.csv")),
        "step,t,N,N_b,N_s,rows_copied,rows_recomputed,gmres_iters,residual,wall_ms"
    );
    let steps = fs::read_to_string(out.join("steps.csv")).unwrap();
    assert!(steps.lines().count() >= 2);
    assert!(!steps.contains('\r'));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["error"].as_f64().unwrap() < 0.1);
}

#[test]
fn heat_problem_by_name() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"problem": "heat", "xi": 2, "h": 0.1, "t_final": 0.25}"#);
    let o = meshless(&["solve", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("heat"));
}

#[test]
fn lebesgue_map_single_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"n_halton": 200, "n_edge": 9}"#);
    let out = tmp.path().join("leb.csv");
    let o = meshless(&[
        "lebesgue-map",
        "--config",
        &cfg,
        "--ell",
        "3",
        "--law",
        "plus-one",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("x,y,lambda,lambda_max"));
    assert_eq!(text.lines().count(), 1 + 200 + 4 * 9);
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(v[2] >= 1.0 && v[3] >= v[2]);
    }
}

#[test]
fn bench_and_converge_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"pe": 1000, "xi_list": [2], "n_list": [250, 400], "bench_steps": 2, "t_final": 0.05}"#,
    );
    let dir = tmp.path().to_str().unwrap();
    let o = meshless(&["bench", "--config", &cfg, "--out", dir]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let timing = fs::read_to_string(tmp.path().join("timing.csv")).unwrap();
    assert_eq!(timing.lines().next(), Some("N,phase,ms"));
    assert_eq!(timing.lines().count(), 5);
    let o = meshless(&["converge", "--config", &cfg, "--out", dir]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let conv = fs::read_to_string(tmp.path().join("convergence.csv")).unwrap();
    assert_eq!(conv.lines().next(), Some("N,xi,error,iters"));
    assert_eq!(conv.lines().count(), 3);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(meshless(&["solve", "--bogus"]).status.code(), Some(2));
    assert_eq!(meshless(&["frobnicate"]).status.code(), Some(2));
    let missing = tmp.path().join("nope.json");
    let o = meshless(&["solve", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.json"));
    let cfg = write_config(tmp.path(), r#"{"n_targt": 300}"#);
    assert_eq!(meshless(&["solve", "--config", &cfg]).status.code(), Some(2));
    let cfg = write_config(tmp.path(), r#"{"problem": "torus"}"#);
    assert_eq!(meshless(&["solve", "--config", &cfg]).status.code(), Some(2));
}
