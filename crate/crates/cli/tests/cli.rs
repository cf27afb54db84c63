use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const MODEL: &str = "[model]\nfamily = \"discrete_alloy\"\ndiscrete_site_profile_d = [2.0]\n";

fn config(dir: &Path, name: &str, experiment: &str, trials: u64) -> PathBuf {
    let path = dir.join(name);
    let text = format!("{MODEL}[experiment]\n{experiment}\n[ensemble]\ntrials = {trials}\nseed = 4\n");
    fs::write(&path, text).unwrap();
    path
}

fn specstat(args: &[&str], cfg: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specstat"))
        .args(args)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .env_remove("SPECSTAT_WORKERS")
        .output()
        .unwrap()
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn every_config_problem_is_reported_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(
        &cfg,
        "[model]\nfamily = \"discrete_alloy\"\ndiscrete_site_profile_d = [0.0]\ncolour = 3\n[experiment]\nenergy = 1.0\nwidths = [0.1]\nsizes = [0]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = specstat(&["wegner"], &cfg, &out);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for key in ["model.discrete_site_profile_d", "model.colour", "experiment.sizes"] {
        assert!(err.contains(key), "{key} missing from:\n{err}");
    }
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = specstat(&["ids"], &dir.path().join("nope.toml"), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_workers_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "ids.toml", "energies = [0.0, 1.0]\nsize = 10", 1);
    let o = specstat(&["ids", "--workers", "0"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn single_trial_run_writes_stamped_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "ids.toml", "energies = [-1.0, 0.0, 1.0, 2.0, 3.0]\nsize = 10", 1);
    let out = dir.path().join("out");
    let o = specstat(&["ids", "--seed", "9"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    let hash = m["config_hash"].as_str().unwrap();
    assert_eq!(m["seed"], 9);
    assert_eq!(m["trials"], 1);
    let csv = fs::read_to_string(out.join("ids.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), format!("# config_hash={hash} seed=9"));
    assert_eq!(lines.next().unwrap(), "energy,n_hat,density,counts,trials,volume");
    assert_eq!(lines.count(), 5);
    for f in m["files"].as_array().unwrap() {
        let bytes = fs::read(out.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["bytes"], bytes.len());
    }
    let jsonl = fs::read_to_string(out.join("ids.jsonl")).unwrap();
    let first: Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    assert_eq!(first["table"], "ids");
    assert_eq!(first["energy"], -1.0);
}

#[test]
fn empty_window_gives_header_only_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "g.toml", "size = 20\nenergy_min = 100.0\nenergy_max = 101.0", 2);
    let out = dir.path().join("out");
    let o = specstat(&["gradients", "--format", "csv"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pairs = fs::read_to_string(out.join("gradient_pairs.csv")).unwrap();
    assert_eq!(pairs.lines().count(), 2);
    assert!(!out.join("gradient_pairs.jsonl").exists());
    let warnings = manifest(&out)["warnings"].to_string();
    assert!(warnings.contains("no adjacent eigenvalue pairs"), "{warnings}");
}

#[test]
fn numeric_failure_exits_3_and_leaves_no_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let good = config(dir.path(), "ids.toml", "energies = [0.0, 1.0]\nsize = 10", 1);
    assert!(specstat(&["ids"], &good, &out).status.success());
    assert!(out.join("manifest.json").exists());
    // fewer processes than the Poisson test accepts
    let bad = config(dir.path(), "ls.toml", "e0 = 1.0\nsize = 50\nreference_trials = 10", 20);
    let o = specstat(&["levelstats"], &bad, &out);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.join("manifest.json").exists());
    assert!(!out.join("poisson_intervals.csv").exists());
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let cfg = config(dir.path(), "ids.toml", "energies = [0.0]\nsize = 10", 1);
    let o = specstat(&["ids"], &cfg, &blocker.join("out"));
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn reruns_are_byte_identical_and_seeds_matter() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "w.toml", "energy = 1.0\nwidths = [0.01, 0.1]\nsizes = [20, 40]", 500);
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["wegner"];
        args.extend_from_slice(extra);
        assert!(specstat(&args, &cfg, &out).status.success());
        fs::read(out.join("wegner_points.csv")).unwrap()
    };
    let a = run("a", &["--workers", "1"]);
    assert_eq!(a, run("b", &["--workers", "3"]));
    assert_ne!(a, run("c", &["--seed", "5"]));
}

#[test]
fn workers_fall_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "ids.toml", "energies = [0.0]\nsize = 10", 1);
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_specstat"))
        .args(["ids", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("SPECSTAT_WORKERS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(manifest(&out)["workers"], 2);
}
