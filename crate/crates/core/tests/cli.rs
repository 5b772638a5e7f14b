//! End-to-end runs of the binary.

use std::path::Path;
use std::process::Command;

fn gpfest(args: &[&str], out: &Path, threads: Option<&str>) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gpfest"));
    cmd.args(args).arg("--out").arg(out).env_remove("GPFEST_SEED");
    if let Some(t) = threads {
        cmd.args(["--threads", t]);
    }
    cmd.output().expect("binary runs")
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(gpfest(&["mse2", "--nu", "1"], dir.path(), None).status.code(), Some(0));
    assert_eq!(gpfest(&["mse2", "--nu", "-1"], dir.path(), None).status.code(), Some(2));
    assert_eq!(gpfest(&["mse2", "--frobnicate"], dir.path(), None).status.code(), Some(2));
    assert_eq!(gpfest(&["table1", "--n", "8", "--theta", "0", "--nu", "0"], dir.path(), None).status.code(), Some(2));
    // A regular file where the output directory should be is a runtime error.
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, b"x").unwrap();
    let o = gpfest(&["mse2"], &blocker, None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("blocker"));
}

#[test]
fn moments_and_mse2_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = gpfest(&["moments", "--m", "2", "--epsilon", "1", "--theta", "1", "--eta", "0", "--nu", "1"], dir.path(), None);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("moments.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("hayashi,e_theta,0.5,0.5,")), "{csv}");

    let o = gpfest(&["mse2", "--theta", "0", "--eta", "0", "--nu", "1", "--epsilon", "0.3", "--format", "json"], dir.path(), None);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("mse2.json")).unwrap()).unwrap();
    assert_eq!(v[0]["m_bar"], 4.0);
    assert_eq!(v[0]["m_hat"], 2.0);
}

#[test]
fn seed_environment_variable_sets_default() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, extra: &[&str], name: &str| {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_gpfest"));
        cmd.args(["simulate", "--estimator", "naive", "--n", "4", "--replicates", "500"]).args(extra).arg("--out").arg(&out);
        match env {
            Some(s) => cmd.env("GPFEST_SEED", s),
            None => cmd.env_remove("GPFEST_SEED"),
        };
        assert!(cmd.status().unwrap().success());
        std::fs::read(out.join("summary.csv")).unwrap()
    };
    let from_env = run(Some("42"), &[], "a");
    let from_flag = run(None, &["--seed", "42"], "b");
    let default = run(None, &[], "c");
    assert_eq!(from_env, from_flag);
    assert_ne!(from_env, default);
}
