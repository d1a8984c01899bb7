use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &str = r#""grids": {"ny": 65, "nc": 64, "n_oracle": 65}, "t_max": 40, "t_samples": 81"#;

fn config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn poiseuille(dir: &Path, alphas: &str) -> std::path::PathBuf {
    config(dir, "run.json", &format!(r#"{{"profile": {{"name": "poiseuille", "type": "builtin"}}, "alpha_list": [{alphas}], {SMALL}}}"#))
}

fn raydamp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_raydamp")).args(args).env("RAYDAMP_THREADS", "1").output().unwrap()
}

fn run_ok(args: &[&str]) {
    let o = raydamp(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn simulate_writes_series_and_report_summarises_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = poiseuille(dir.path(), "1.0, 2.0");
    let out = dir.path().join("out");
    let (c, o) = (cfg.to_str().unwrap(), out.to_str().unwrap());
    run_ok(&["simulate", "--config", c, "--out", o]);
    let series = std::fs::read_to_string(out.join("series_alpha_1.csv")).unwrap();
    assert_eq!(series.lines().next().unwrap(), "t,norm_V,norm_V2,omega0_abs,omega_probe_abs");
    assert_eq!(series.lines().count(), 82);
    let m = read_json(&out.join("manifest_simulate.json"));
    assert!(m["wall_time_s"].as_f64().unwrap() > 0.0);
    assert_eq!(m["tolerances"]["solver_tol"].as_f64().unwrap(), 1e-11);
    assert!(m["notes"][0].as_str().unwrap().contains("no-op"));
    for check in m["runs"][0]["representation_check"].as_array().unwrap() {
        assert!(check["relative_l2"].as_f64().unwrap() < 1e-2);
    }

    run_ok(&["report", "--out", o]);
    let s = read_json(&out.join("summary.json"));
    let rows = s["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0]["exponent_V"].as_f64().unwrap() < -0.5);
    assert!(rows[0]["transport_exponent"].is_null());
    let long = std::fs::read_to_string(out.join("report_long.csv")).unwrap();
    assert_eq!(long.lines().next().unwrap(), "alpha,quantity,t,value");
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = poiseuille(dir.path(), "1.0");
    let c = cfg.to_str().unwrap();
    for sub in ["a", "b"] {
        run_ok(&["simulate", "--config", c, "--out", dir.path().join(sub).to_str().unwrap()]);
    }
    for f in ["series_alpha_1.csv", "snapshot_alpha_1.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn spectral_tables_and_scan_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = poiseuille(dir.path(), "1.0");
    let out = dir.path().join("out");
    run_ok(&["spectral", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let t = std::fs::read_to_string(out.join("spectral_alpha_1.csv")).unwrap();
    let header: Vec<&str> = t.lines().next().unwrap().split(',').collect();
    assert_eq!(header, ["c", "y_c", "A1", "A", "B", "J", "A2", "B2", "II2", "II3"]);
    assert_eq!(t.lines().count(), 65);
    let row: Vec<&str> = t.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), 10);
    assert!(row.iter().all(|v| v.contains('e') && v.parse::<f64>().is_ok()));
    let scan = std::fs::read_to_string(out.join("scan_report.txt")).unwrap();
    assert!(scan.contains("embedding_candidates: []"));
    let ev = std::fs::read_to_string(out.join("eigenvalues_alpha_1.csv")).unwrap();
    assert_eq!(ev.lines().count(), 64);
}

#[test]
fn invalid_configs_are_rejected_with_field_names() {
    let dir = tempfile::tempdir().unwrap();
    let no_profile = config(dir.path(), "a.json", r#"{"alpha_list": [1.0]}"#);
    let o = raydamp(&["simulate", "--config", no_profile.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("profile"));

    let zero = config(dir.path(), "b.json", r#"{"profile": {"name": "poiseuille", "type": "builtin"}, "alpha_list": [0.0]}"#);
    let o = raydamp(&["spectral", "--config", zero.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("alpha_list[0]") && err.contains("alpha > 0"), "{err}");

    let few = config(dir.path(), "c.json", r#"{"profile": {"name": "poiseuille", "type": "builtin"}, "t_samples": 8}"#);
    let o = raydamp(&["simulate", "--config", few.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("t_samples"));

    let grid = config(dir.path(), "d.json", r#"{"profile": {"name": "poiseuille", "type": "builtin"}, "grids": {"ny": 100, "nc": 64, "n_oracle": 65}}"#);
    let o = raydamp(&["simulate", "--config", grid.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("grids.ny"));
}

#[test]
fn report_without_runs_is_missing_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = raydamp(&["report", "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("MissingRun"));
}

#[test]
fn verify_passes_on_poiseuille() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = poiseuille(dir.path(), "1.0");
    let out = dir.path().join("out");
    let o = raydamp(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.lines().all(|l| l.contains("PASS")));
    assert_eq!(read_json(&out.join("verify_report.json"))["pass"], Value::Bool(true));
}

#[test]
fn toml_config_drives_kernels_transport_and_depletion() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "run.toml",
        r#"
alpha_list = [1.0]
t_max = 40.0
t_samples = 81

[profile]
name = "poiseuille"
type = "builtin"

[grids]
ny = 65
nc = 64
n_oracle = 65

[transport]
t_min = 10.0
t_max = 1000.0
samples = 21
"#,
    );
    let out = dir.path().join("out");
    let (c, o) = (cfg.to_str().unwrap(), out.to_str().unwrap());
    run_ok(&["kernels", "--config", c, "--out", o]);
    let k = std::fs::read_to_string(out.join("kernels_alpha_1.csv")).unwrap();
    assert_eq!(k.lines().next().unwrap(), "c,K_o,K_e,Lambda1,Lambda2,Lambda3,Lambda4");

    run_ok(&["transport", "--config", c, "--out", o]);
    let m = read_json(&out.join("manifest_transport.json"));
    let e = m["runs"][0]["fit"]["exponent"].as_f64().unwrap();
    assert!((e + 0.5).abs() < 0.1, "{e}");

    run_ok(&["depletion", "--config", c, "--out", o]);
    let m = read_json(&out.join("manifest_depletion.json"));
    assert!(m["runs"][0]["depletion_ratio"].as_f64().unwrap() < 1.0);
}
