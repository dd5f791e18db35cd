use std::path::Path;
use std::process::{Command, Output};

const RUN: &str = r#"{
  "manifold": { "dim": 2, "warp": { "kind": "hyperbolic" } },
  "nonlinearity": { "kind": "type_two", "mu": 0.5, "beta": 1.0, "p": 1.0 },
  "initial": { "amplitude": 0.1, "shape": { "kind": "ground_state_scaled" } },
  "grid": { "radius": 20.0, "points": 800 },
  "horizon": 100.0
}"#;

fn fujita(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fujita"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_blowup_agrees_with_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", RUN);
    let out = dir.path().join("out");
    let o = fujita(&["simulate", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("verdict: blowup"), "{text}");
    assert!(text.contains("analytic: blowup"), "{text}");
    assert!(text.contains("agreement: true"), "{text}");
    for name in ["trajectory_0.csv", "summary.csv", "summary.json", "sup.svg"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let csv = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(csv.starts_with("point_id,verdict,t_est,sup_final,runtime_s,agreement\n"), "{csv}");
}

#[test]
fn zero_data_is_global() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", &RUN.replace("\"amplitude\": 0.1", "\"amplitude\": 0.0"));
    let out = dir.path().join("out");
    let o = fujita(&["simulate", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("verdict: global"), "{text}");
    assert!(text.contains("agreement: true"), "{text}");
}

#[test]
fn negative_alpha_exits_with_code_two_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = RUN.replace(
        r#"{ "kind": "type_two", "mu": 0.5, "beta": 1.0, "p": 1.0 }"#,
        r#"{ "kind": "type_one", "alpha": -1.0, "q": 2.0 }"#,
    );
    let cfg = write(dir.path(), "bad.json", &text);
    let o = fujita(&["simulate", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn unknown_key_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", &RUN.replace("\"horizon\"", "\"horizon_typo\""));
    let o = fujita(&["simulate", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("horizon_typo"), "{}", stderr(&o));
}

#[test]
fn missing_file_is_a_config_error() {
    let o = fujita(&["simulate", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
  "manifold": { "dim": 2, "warp": { "kind": "hyperbolic" } },
  "lambda": 0.5,
  "grid": { "radius": 20.0, "points": 400 }
}"#;
    let cfg = write(dir.path(), "eigen.json", text);
    let o = fujita(&["eigen", &cfg]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("too large"), "{}", stderr(&o));
}

#[test]
fn thresholds_inline_and_file() {
    let inline = r#"{"manifold": {"dim": 4, "warp": {"kind": "hyperbolic"}}, "nonlinearity": {"kind": "type_one", "alpha": 1.0, "q": 1.0}}"#;
    let o = fujita(&["thresholds", inline]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("global_for_small_data"), "{}", stdout(&o));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.json", &inline.replace("\"dim\": 4", "\"dim\": 3"));
    let o = fujita(&["thresholds", &cfg]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("borderline_unknown"), "{}", stdout(&o));
}

#[test]
fn eigen_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
  "manifold": { "dim": 3, "warp": { "kind": "hyperbolic" } },
  "grid": { "radius": 20.0, "points": 2000 }
}"#;
    let cfg = write(dir.path(), "eigen.json", text);
    let csv = dir.path().join("phi.csv");
    let o = fujita(&["eigen", &cfg, "--profile", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("lambda: 1"), "{}", stdout(&o));
    let profile = std::fs::read_to_string(csv).unwrap();
    assert_eq!(profile.lines().count(), 2001);
}

#[test]
fn sweep_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
  "base": {
    "manifold": { "dim": 2, "warp": { "kind": "hyperbolic" } },
    "nonlinearity": { "kind": "type_two", "mu": 0.5, "beta": 1.0, "p": 1.0 },
    "initial": { "amplitude": 0.01, "shape": { "kind": "ground_state_scaled" } },
    "grid": { "radius": 15.0, "points": 300 },
    "horizon": 80.0,
    "timing": false,
    "seed": 7
  },
  "axes": [
    { "param": "mu", "values": [0.1, 0.6] },
    { "param": "p", "values": [0.8, 1.0] }
  ],
  "write_trajectories": true
}"#;
    let cfg = write(dir.path(), "sweep.json", text);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = fujita(&["sweep", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["summary.csv", "phase.svg", "trajectory_0.csv", "trajectory_3.csv"] {
        let x = std::fs::read(a.join(name)).unwrap();
        let y = std::fs::read(b.join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
    let csv = std::fs::read_to_string(a.join("summary.csv")).unwrap();
    assert!(csv.starts_with("point_id,mu,p,verdict,t_est,sup_final,runtime_s,agreement\n"), "{csv}");
    assert_eq!(csv.lines().count(), 5);
}
