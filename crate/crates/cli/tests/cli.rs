//! End-to-end checks of the `tep` binary: exit codes, output schemas, and
//! byte-identical reruns on tiny configurations.

use std::fs;
use std::path::Path;
use std::process::Command;

fn tep() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tep"))
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

fn setup_ensemble(dir: &Path) {
    write(
        &dir.join("ens.json"),
        r#"{"lambda": [[3, 1.0]], "rho": [[6, 1.0]], "n": 512}"#,
    );
}

#[test]
fn simulate_is_deterministic_and_schema_stable() {
    let tmp = tempfile::tempdir().unwrap();
    setup_ensemble(tmp.path());
    write(
        &tmp.path().join("cfg.json"),
        r#"{"mode": "simulate", "ensemble": "ens.json", "eps": [0.0, 0.35],
            "trials": 40, "decoders": ["bp", "tep"], "seed": 11}"#,
    );
    let out1 = tmp.path().join("run1");
    let out2 = tmp.path().join("run2");
    for out in [&out1, &out2] {
        let status = tep()
            .args(["simulate", "--config"])
            .arg(tmp.path().join("cfg.json"))
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let s1 = fs::read(out1.join("summary.json")).unwrap();
    let s2 = fs::read(out2.join("summary.json")).unwrap();
    assert_eq!(s1, s2, "summary.json must be byte-identical across reruns");

    let csv = fs::read_to_string(out1.join("trials_n512_eps0.0000_bp.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "trial,eps,n,decoder,status,iters,residual_vars,transfers,seed"
    );
    assert_eq!(lines.count(), 40);
    // eps = 0 decodes trivially.
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(out1.join("summary.json")).unwrap()).unwrap();
    let points = summary["result"].as_array().unwrap();
    let zero_point = points
        .iter()
        .find(|p| p["eps"] == 0.0 && p["decoder"] == "bp")
        .unwrap();
    assert_eq!(zero_point["word_errors"], 0);
}

#[test]
fn threshold_runs_and_reports() {
    let tmp = tempfile::tempdir().unwrap();
    setup_ensemble(tmp.path());
    write(
        &tmp.path().join("cfg.json"),
        r#"{"mode": "threshold", "ensemble": "ens.json", "seed": 1}"#,
    );
    let out = tmp.path().join("out");
    let status = tep()
        .args(["threshold", "--config"])
        .arg(tmp.path().join("cfg.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    let eps = summary["result"]["eps_bp"].as_f64().unwrap();
    assert!((eps - 0.4294).abs() < 5e-4, "eps_bp = {eps}");
}

#[test]
fn evolve_writes_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    setup_ensemble(tmp.path());
    write(
        &tmp.path().join("cfg.json"),
        r#"{"mode": "evolve", "ensemble": "ens.json", "eps": [0.40],
            "sample_trajectories": 3, "seed": 2}"#,
    );
    let out = tmp.path().join("out");
    let status = tep()
        .args(["evolve", "--config"])
        .arg(tmp.path().join("cfg.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let ode = fs::read_to_string(out.join("ode_n512_eps0.4000.csv")).unwrap();
    assert!(ode.starts_with("t,tau,e,R1,R2,lavg,ravg\n"));
    assert!(out.join("traj_n512_eps0.4000_s2.csv").exists());
    let mean = fs::read_to_string(out.join("mean_n512_eps0.4000.csv")).unwrap();
    assert!(mean.starts_with("t,tau,count,mean_e,mean_R1,mean_R2\n"));
}

#[test]
fn urn_and_gamma_run() {
    let tmp = tempfile::tempdir().unwrap();
    setup_ensemble(tmp.path());
    write(
        &tmp.path().join("urn.json"),
        r#"{"mode": "urn", "ensemble": "ens.json", "urn_balls": [200, 2000],
            "urn_fraction": 0.8, "seed": 3}"#,
    );
    let out = tmp.path().join("u");
    assert!(tep()
        .args(["urn", "--config"])
        .arg(tmp.path().join("urn.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let urn = fs::read_to_string(out.join("urn.csv")).unwrap();
    assert!(urn.starts_with("fraction,lavg_n200,lavg_n2000\n"));

    write(
        &tmp.path().join("gamma.json"),
        r#"{"mode": "gamma", "ensemble": "ens.json", "gamma_n": [1024, 4096], "seed": 3}"#,
    );
    let gout = tmp.path().join("g");
    assert!(tep()
        .args(["gamma", "--config"])
        .arg(tmp.path().join("gamma.json"))
        .arg("--out")
        .arg(&gout)
        .status()
        .unwrap()
        .success());
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(gout.join("summary.json")).unwrap()).unwrap();
    assert!(summary["result"]["gamma_critical"].as_f64().unwrap() > 0.0);
}

#[test]
fn scaling_paper_constant_fallback_sets_provenance() {
    let tmp = tempfile::tempdir().unwrap();
    setup_ensemble(tmp.path());
    write(
        &tmp.path().join("cfg.json"),
        r#"{"mode": "scaling", "ensemble": "ens.json", "seed": 4,
            "delta_trials": 0, "delta_paper": 0.0526, "gamma_n": [1024, 4096]}"#,
    );
    let out = tmp.path().join("out");
    assert!(tep()
        .args(["scaling", "--config"])
        .arg(tmp.path().join("cfg.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["result"]["delta"]["provenance"], "paper-constant");
    assert_eq!(summary["result"]["eps_bp"]["provenance"], "computed");
    assert_eq!(summary["result"]["delta"]["value"], 0.0526);
}

#[test]
fn exit_code_2_on_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    setup_ensemble(tmp.path());
    // Missing config file.
    let status = tep()
        .args(["simulate", "--config"])
        .arg(tmp.path().join("nope.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // Invalid eps.
    write(
        &tmp.path().join("bad.json"),
        r#"{"mode": "simulate", "ensemble": "ens.json", "eps": [2.0], "seed": 1}"#,
    );
    let status = tep()
        .args(["simulate", "--config"])
        .arg(tmp.path().join("bad.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // Mode/subcommand mismatch.
    write(
        &tmp.path().join("mode.json"),
        r#"{"mode": "urn", "ensemble": "ens.json", "seed": 1}"#,
    );
    let status = tep()
        .args(["simulate", "--config"])
        .arg(tmp.path().join("mode.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // Broken ensemble file.
    write(&tmp.path().join("ens2.json"), r#"{"lambda": [[3, 0.9]]}"#);
    write(
        &tmp.path().join("cfg2.json"),
        r#"{"mode": "simulate", "ensemble": "ens2.json", "eps": [0.4], "seed": 1}"#,
    );
    let status = tep()
        .args(["simulate", "--config"])
        .arg(tmp.path().join("cfg2.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn seed_override_changes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    setup_ensemble(tmp.path());
    write(
        &tmp.path().join("cfg.json"),
        r#"{"mode": "simulate", "ensemble": "ens.json", "eps": [0.42],
            "trials": 50, "decoders": ["tep"], "seed": 11}"#,
    );
    let out1 = tmp.path().join("a");
    let out2 = tmp.path().join("b");
    assert!(tep()
        .args(["simulate", "--config"])
        .arg(tmp.path().join("cfg.json"))
        .arg("--out")
        .arg(&out1)
        .status()
        .unwrap()
        .success());
    assert!(tep()
        .args(["simulate", "--config"])
        .arg(tmp.path().join("cfg.json"))
        .args(["--seed", "99"])
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap()
        .success());
    let s1 = fs::read(out1.join("summary.json")).unwrap();
    let s2 = fs::read(out2.join("summary.json")).unwrap();
    assert_ne!(s1, s2);
}

#[test]
fn toml_config_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    setup_ensemble(tmp.path());
    write(
        &tmp.path().join("cfg.toml"),
        "mode = \"threshold\"\nensemble = \"ens.json\"\nseed = 9\n",
    );
    let out = tmp.path().join("out");
    assert!(tep()
        .args(["threshold", "--config"])
        .arg(tmp.path().join("cfg.toml"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
}
