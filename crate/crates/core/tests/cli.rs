use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qpcircle(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpcircle"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("QPCIRCLE_THREADS")
        .output()
        .expect("binary runs")
}

fn record(out: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join(name)).unwrap()).unwrap()
}

#[test]
fn rotnum_on_the_four_branch_translation() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["rotnum", "--system", "translation", "--k", "1", "--q", "2", "--l", "1", "--p", "2", "--n", "100000"];
    let o = qpcircle(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = record(dir.path(), "rotnum.json");
    let rho = r["outputs"]["estimate"]["value"].as_f64().unwrap();
    assert!((rho - 0.55902).abs() < 1e-5, "{rho}");
    assert_eq!(r["command"], "rotnum");
    let m = record(dir.path(), "manifest.json");
    assert_eq!(m["seed"], 0);
    assert_eq!(m["outputs"], serde_json::json!(["rotnum.json"]));
}

#[test]
fn harper_diag_reports_half() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpcircle(dir.path(), &["harper", "diag", "--n", "100000"]);
    assert_eq!(o.status.code(), Some(0));
    let r = record(dir.path(), "harper-diag.json");
    let rho = r["outputs"]["rotation"]["value"].as_f64().unwrap();
    assert!((rho - 0.5).abs() < 1e-3);
    assert!(r["margins"]["symmetry_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = qpcircle(dir.path(), &["rotnum", "--system", "nosuch"]);
    assert_eq!(unknown.status.code(), Some(2));

    let sub = qpcircle(dir.path(), &["frobnicate"]);
    assert_eq!(sub.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&sub.stderr).contains("Usage"));

    let foreign = qpcircle(dir.path(), &["rotnum", "--system", "arnold", "--k", "2"]);
    assert_eq!(foreign.status.code(), Some(2));

    let gcd = qpcircle(dir.path(), &["rotnum", "--system", "translation", "--k", "2", "--q", "2"]);
    assert_eq!(gcd.status.code(), Some(2));
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn domain_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    // a box straddling the attracting graph returns to itself
    let args = [
        "closest", "--system", "contraction", "--a", "0.6", "--offset", "0.2", "--amp", "0.05", "--box",
        "0,0.1,0.2,0.2", "--horizon", "100",
    ];
    let o = qpcircle(dir.path(), &args);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not wandering"));

    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "system = translation\nk = 2\nq = 2\n").unwrap();
    let o = qpcircle(dir.path(), &["rotnum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig1.cfg");
    fs::write(&cfg, "# torus translation\nsystem = translation\nomega = golden\nk = 1\nq = 2\nl = 1\np = 2\n").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(qpcircle(&a, &["rotnum", "--config", cfg.to_str().unwrap(), "--n", "1000"]).status.code(), Some(0));
    let flags = ["rotnum", "--system", "translation", "--k", "1", "--q", "2", "--l", "1", "--p", "2", "--n", "1000"];
    assert_eq!(qpcircle(&b, &flags).status.code(), Some(0));
    assert_eq!(
        record(&a, "rotnum.json")["outputs"],
        record(&b, "rotnum.json")["outputs"]
    );
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["--seed", "7", "harper", "graph", "--n", "20000", "--ensemble", "4"],
        &["rotnum", "--system", "arnold", "--rho0", "0.3", "--a", "0.5", "--b", "0.2", "--method", "integrated", "--n", "5000"],
        &["distortion", "--system", "arnold", "--rho0", "0.1", "--a", "0.3", "--b", "0.2", "--box", "0.1,0.04,0.3,0.002"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let one = dir.path().join(format!("{i}-one"));
        let four = dir.path().join(format!("{i}-four"));
        let again = dir.path().join(format!("{i}-again"));
        let mut a = vec!["--threads", "1"];
        a.extend_from_slice(args);
        let mut b = vec!["--threads", "4"];
        b.extend_from_slice(args);
        assert_eq!(qpcircle(&one, &a).status.code(), Some(0));
        assert_eq!(qpcircle(&four, &b).status.code(), Some(0));
        let env = Command::new(env!("CARGO_BIN_EXE_qpcircle"))
            .arg("--out")
            .arg(&again)
            .args(*args)
            .env("QPCIRCLE_THREADS", "3")
            .output()
            .unwrap();
        assert_eq!(env.status.code(), Some(0));
        let reference = files(&one);
        assert!(reference.len() >= 2);
        assert_eq!(reference, files(&four), "{args:?}");
        assert_eq!(reference, files(&again), "{args:?}");
    }
}

#[test]
fn seed_changes_the_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let base = ["harper", "graph", "--n", "4000", "--ensemble", "2"];
    let mut with_seed = vec!["--seed", "1"];
    with_seed.extend_from_slice(&base);
    assert_eq!(qpcircle(&a, &base).status.code(), Some(0));
    assert_eq!(qpcircle(&b, &with_seed).status.code(), Some(0));
    assert_ne!(fs::read(a.join("graph.csv")).unwrap(), fs::read(b.join("graph.csv")).unwrap());
    assert_eq!(record(&b, "manifest.json")["seed"], 1);
}

#[test]
fn trajectory_and_graph_files() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qpcircle(dir.path(), &["harper", "traj", "--n", "100", "--skip", "10"]).status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("theta,x"));
    assert_eq!(csv.lines().count(), 101);
    assert!(dir.path().join("plot.gp").exists());

    assert_eq!(
        qpcircle(dir.path(), &["returns", "--base-len", "0.1", "--horizon", "40"]).status.code(),
        Some(0)
    );
    let r = record(dir.path(), "returns.json");
    assert_eq!(r["outputs"]["return_times"], serde_json::json!([-34, -21, 0, 21, 34]));
}
