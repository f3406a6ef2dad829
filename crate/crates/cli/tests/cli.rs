use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/configs").join(name)
}

fn qkdv(args: &[&str], out: &Path, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qkdv"));
    cmd.args(args).arg("--out").arg(out).env_remove("QKDV_THREADS");
    if let Some(t) = threads {
        cmd.env("QKDV_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn run(command: &str, cfg: &str, out: &Path) -> Output {
    let path = config(cfg);
    qkdv(&[command, "--config", path.to_str().unwrap()], out, None)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_omega_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("solve", "missing_omega.json", dir.path());
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("missing field `omega`"), "{msg}");
    assert!(msg.contains("[config]"), "{msg}");
}

#[test]
fn unreadable_config_and_bad_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("solve", "no_such_file.json", dir.path());
    assert_eq!(o.status.code(), Some(2));
    let path = config("constant.json");
    let o = qkdv(&["solve", "--config", path.to_str().unwrap()], dir.path(), Some("zero"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn constant_data_has_zero_residual() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("solve", "constant.json", dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rep = read_json(&dir.path().join("report.json"));
    assert_eq!(rep["residual"]["max_residual"], 0.0);
    assert_eq!(rep["mode_zero"]["max_deviation"], 0.0);
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(csv.starts_with("t,x,u\n"));
    for line in csv.lines().skip(1) {
        assert_eq!(line.rsplit(',').next(), Some("0.5"), "{line}");
    }
}

#[test]
fn horizon_violation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("two_mode.json"))
        .unwrap()
        .replace("\"t_request\": 0.01", "\"t_request\": 0.5");
    let cfg = dir.path().join("far.json");
    std::fs::write(&cfg, text).unwrap();
    let o = qkdv(&["solve", "--config", cfg.to_str().unwrap()], &dir.path().join("out"), None);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("horizon"));
}

#[test]
fn two_mode_solve_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("solve", "two_mode.json", dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/two_mode");
    for name in ["trajectory.json", "solution.csv", "report.json"] {
        let got = std::fs::read(dir.path().join(name)).unwrap();
        let want = std::fs::read(golden.join(name)).unwrap();
        assert!(got == want, "{name} differs from golden copy");
    }
}

#[test]
fn seeded_runs_are_byte_identical() {
    let path = config("random_oracle.json");
    let mut outputs = Vec::new();
    for threads in ["1", "2", "1"] {
        let dir = tempfile::tempdir().unwrap();
        for cmd in ["solve", "verify"] {
            let out = dir.path().join(cmd);
            let o = qkdv(&[cmd, "--config", path.to_str().unwrap(), "--seed", "5"], &out, Some(threads));
            assert!(o.status.success(), "{}", stderr(&o));
        }
        let files: Vec<Vec<u8>> = ["solve/trajectory.json", "solve/report.json", "verify/report.json"]
            .iter()
            .map(|f| std::fs::read(dir.path().join(f)).unwrap())
            .collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);

    let dir = tempfile::tempdir().unwrap();
    let o = qkdv(&["solve", "--config", path.to_str().unwrap(), "--seed", "6"], dir.path(), None);
    assert!(o.status.success());
    assert_ne!(std::fs::read(dir.path().join("trajectory.json")).unwrap(), outputs[0][0]);
}

#[test]
fn tree_oracle_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("verify", "random_oracle.json", dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rep = read_json(&dir.path().join("report.json"));
    assert_eq!(rep["pass"], true);
    assert_eq!(rep["measured"]["values"].as_array().unwrap().len(), 21);
    assert!(rep["measured"]["max_relative_diff"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn combinatorics_and_uniqueness_suites_pass() {
    let base = std::fs::read_to_string(config("two_mode.json")).unwrap();
    for suite in ["combinatorics", "uniqueness"] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("cfg.json");
        std::fs::write(&cfg, base.replace("\"spectrum\"", &format!("\"{suite}\""))).unwrap();
        let out = dir.path().join("out");
        let o = qkdv(&["verify", "--config", cfg.to_str().unwrap()], &out, None);
        assert!(o.status.success(), "{suite}: {}", stderr(&o));
        let rep = read_json(&out.join("report.json"));
        assert_eq!(rep["suite"], suite);
        assert_eq!(rep["pass"], true);
    }
}

#[test]
fn spectrum_suite_on_constant_data_has_zero_drift() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("verify", "constant.json", dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rep = read_json(&dir.path().join("report.json"));
    assert_eq!(rep["measured"]["report"]["max_drift"], 0.0);
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(csv.starts_with("t,edge_index,E\n"));
}

#[test]
fn failed_suite_exits_4_and_names_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("two_mode.json"))
        .unwrap()
        .replace("\"suite\": \"spectrum\"", "\"suite\": \"spectrum\", \"spectrum\": {\"scale\": 1.0}, \"drift_tol\": 1e-12");
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, text).unwrap();
    let out = dir.path().join("out");
    let o = qkdv(&["verify", "--config", cfg.to_str().unwrap()], &out, None);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("[spectral] spectral drift"));
    let rep = read_json(&out.join("report.json"));
    assert_eq!(rep["pass"], false);
}

#[test]
fn constant_chain_repeats_itself() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("chain", "constant.json", dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = read_json(&dir.path().join("chain.json"));
    let trajs = doc["trajectories"].as_array().unwrap();
    assert_eq!(trajs.len(), 10);
    for t in trajs {
        assert_eq!(t["modes"], trajs[0]["modes"]);
    }
    let rep = read_json(&dir.path().join("report.json"));
    assert_eq!(rep["boundary_spectra"]["max_drift"], 0.0);
}

#[test]
fn zero_chain_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("chain", "zero.json", dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = read_json(&dir.path().join("chain.json"));
    for t in doc["trajectories"].as_array().unwrap() {
        assert!(t["modes"].as_array().unwrap().is_empty());
    }
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    for line in csv.lines().skip(1) {
        assert_eq!(line.rsplit(',').next(), Some("0"), "{line}");
    }
}

#[test]
fn two_mode_chain_stays_isospectral() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("chain", "two_mode.json", dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rep = read_json(&dir.path().join("report.json"));
    assert_eq!(rep["segments_completed"], 4);
    assert!(rep["budget_violation"].is_null());
    let drift = rep["boundary_spectra"]["max_drift"].as_f64().unwrap();
    assert!(drift <= 1e-4, "drift {drift}");
    assert_eq!(rep["boundary_spectra"]["edges"].as_array().unwrap().len(), 5);
    for seg in rep["segments"].as_array().unwrap() {
        assert!(seg["b_measured"].as_f64().unwrap() <= 4.0);
    }
}

#[test]
fn chain_budget_exceeded_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("two_mode.json"))
        .unwrap()
        .replace("\"budget_multiple\": 4.0", "\"budget_multiple\": 0.5");
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, text).unwrap();
    let out = dir.path().join("out");
    let o = qkdv(&["chain", "--config", cfg.to_str().unwrap()], &out, None);
    assert_eq!(o.status.code(), Some(5));
    let rep = read_json(&out.join("report.json"));
    assert!(rep["budget_violation"].as_str().unwrap().contains("exceeds budget"));
}
