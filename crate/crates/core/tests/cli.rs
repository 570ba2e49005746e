use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ruin-sim"));
    c.env_remove("RUIN_SIM_WORKERS");
    c
}

fn shipped(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, name: &str, mut cfg: Value) -> PathBuf {
    cfg["output_dir"] = json!(dir.join(format!("out_{name}")));
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_experiments_names_every_kind() {
    let o = bin().arg("list-experiments").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for kind in [
        "ruin_finite",
        "ruin_random",
        "uniform_scan",
        "ld_enod",
        "ld_wuod",
        "renewal_moments",
        "dependence_audit",
        "tail_diagnostics",
    ] {
        assert!(text.contains(kind), "{kind} missing");
    }
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "json") {
            continue;
        }
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let o = run(&["validate"], &path);
        let expected = match name.as_str() {
            "ld_enod_dependent_arrivals" | "ruin_random_heavy_tau" => 2,
            _ => 0,
        };
        assert_eq!(o.status.code(), Some(expected), "{name}: {}", stderr(&o));
        if expected == 0 {
            assert!(o.stdout.is_empty());
        }
    }
}

#[test]
fn validate_reports_failed_conditions() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "arr", shipped("ld_enod_dependent_arrivals"));
    let o = run(&["validate"], &cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("g_L(n)=o(n^b)"));

    let mut unsafe_model = shipped("ruin_finite_enod");
    unsafe_model["experiment"]["model"]["premium_rate"] = json!(1.5);
    let cfg = write_config(tmp.path(), "unsafe", unsafe_model);
    let o = run(&["validate"], &cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("safety load"));
}

#[test]
fn malformed_configs_exit_one_with_position() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = shipped("tail_diagnostics");
    cfg.as_object_mut().unwrap().remove("master_seed");
    let path = write_config(tmp.path(), "noseed", cfg);
    let o = run(&["validate"], &path);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("master_seed") && err.contains("line "), "{err}");

    let broken = tmp.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"schema_version\": 1,\n  \"experiment\": [\n}").unwrap();
    let o = run(&["run"], &broken);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4, column 1"), "{}", stderr(&o));

    let o = run(&["validate"], &tmp.path().join("absent.json"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gate_failure_simulates_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "tau", shipped("ruin_random_heavy_tau"));
    let o = run(&["run"], &cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("P(τ>x)=o(Ḡ(x))"));
    assert!(!tmp.path().join("out_tau").exists());
}

#[test]
fn uniform_scan_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = shipped("uniform_scan");
    cfg["n_paths"] = json!(4096);
    cfg["experiment"]["x_grid"] = json!([200.0, 400.0]);
    cfg["experiment"]["t_points_per_x"] = json!(3);
    let path = write_config(tmp.path(), "scan", cfg);
    let o = run(&["run", "--plots"], &path);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("out_scan");
    let csv = std::fs::read_to_string(out.join("uniform_scan.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,t,psi_mc,stderr,en_t,approx,ratio");
    assert_eq!(lines.len(), 1 + 2 * 4);
    for (k, line) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 7);
        if k % 4 == 3 {
            assert_eq!(fields[1], "sup");
            assert!(fields[6].parse::<f64>().unwrap() >= 0.0);
        } else {
            assert!(fields.iter().all(|f| f.parse::<f64>().is_ok()));
        }
    }
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "uniform_scan");
    assert!(manifest["statement"].as_str().unwrap().contains("x·g(x)"));
    assert!(manifest["timestamp"].is_string() && manifest["version"].is_string());
    assert_eq!(manifest["config"]["master_seed"], 20240105);
    assert!(out.join("uniform_scan_ratio.svg").exists());
}

#[test]
fn worker_flag_env_and_config_agree_bytewise() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = shipped("ruin_finite_enod");
    cfg["n_paths"] = json!(400_000);
    let path = write_config(tmp.path(), "det", cfg);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let o = run(&["run", "--workers", "1", "--output-dir", a.to_str().unwrap()], &path);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = bin()
        .env("RUIN_SIM_WORKERS", "3")
        .args(["run", "--output-dir", b.to_str().unwrap(), "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let read = |d: &Path| std::fs::read(d.join("ruin_finite.csv")).unwrap();
    assert_eq!(read(&a), read(&b));

    let o = run(&["run", "--workers", "0"], &path);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn inconclusive_results_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = shipped("ruin_finite_enod");
    cfg["n_paths"] = json!(10_000);
    cfg["experiment"]["x_grid"] = json!([1e5, 1e6]);
    let path = write_config(tmp.path(), "rare", cfg);
    let o = run(&["run"], &path);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(tmp.path().join("out_rare").join("ruin_finite.csv").exists());
}
