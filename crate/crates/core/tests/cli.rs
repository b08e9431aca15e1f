use std::path::Path;
use std::process::{Command, Output};

fn dpp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpp")).args(args).output().expect("binary runs")
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(dpp(&["bench", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(dpp(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn help_lists_flags() {
    let out = dpp(&["bench", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in ["--benchmark", "--algo", "--omega", "--runs", "--seed", "--budget", "--budget-seconds", "--out", "--config"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn bench_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let o = dpp(&[
        "bench", "--benchmark", "linear", "--n", "30", "--algo", "dpp-rl,ql,vi", "--runs", "2", "--seed", "7",
        "--budget", "200", "--timing", "off", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(header(&out.join("results.csv")), "benchmark,algorithm,params,run,seed,iteration,cpu_seconds,loss");
    assert_eq!(header(&out.join("summary.csv")), "benchmark,algorithm,params,mean_final,std_final,n_runs");
    // dpp-rl, three QL step sizes and VI
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 6);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["command"], "bench");
}

#[test]
fn config_file_reproduces_flags() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let o = dpp(&[
        "rl", "--benchmark", "lock", "--n", "20", "--runs", "2", "--seed", "3", "--budget", "100", "--timing", "off",
        "--out", a.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, manifest["config"].to_string()).unwrap();
    let b = dir.path().join("b");
    let o = dpp(&["rl", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(a.join("results.csv")).unwrap(), std::fs::read(b.join("results.csv")).unwrap());
}

#[test]
fn generate_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let mdp = dir.path().join("m.json");
    let o = dpp(&["generate", "--benchmark", "random", "--n", "6", "--actions", "3", "--gamma", "0.9", "--out", mdp.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("s");
    let o = dpp(&[
        "solve", "--mdp", mdp.to_str().unwrap(), "--gamma", "0.9", "--eta", "2", "--budget", "50", "--eval-every", "10",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 6);
    assert!(rows.lines().nth(1).unwrap().contains(",dpp,eta=2,"));
}

#[test]
fn bound_check_passes() {
    let o = dpp(&["bound-check", "--S", "10", "--A", "3", "--gamma", "0.9", "--eta", "inf", "--k", "500"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 violations"));
}

#[test]
fn replacement_writes_error_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = dpp(&["replacement", "--algo", "sadpp", "--N", "50", "--iters", "10", "--runs", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = std::fs::read_to_string(out.join("results.csv")).unwrap();
    // two runs, checkpoints 0..=10
    assert_eq!(rows.lines().count(), 1 + 2 * 11);
    for line in rows.lines().skip(1) {
        let err: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&err));
    }
}

#[test]
fn runtime_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = dpp(&["bench", "--benchmark", "linear", "--n", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = dpp(&["rl", "--algo", "ql", "--omega", "0.4", "--n", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = dpp(&["rl", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
