use std::path::{Path, PathBuf};
use std::process::Command;

use semimix::cli::{estimate_output, EstimateOutput, RunManifest};
use semimix::data::read_csv_file;
use semimix::montecarlo::ExperimentConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semimix"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

/// Copy of a shipped config with some fields replaced.
fn patched(dir: &Path, name: &str, patch: serde_json::Value) -> PathBuf {
    let text = std::fs::read_to_string(config(name)).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for (k, val) in patch.as_object().unwrap() {
        v[k] = val.clone();
    }
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    p
}

fn status(cmd: &mut Command) -> i32 {
    cmd.output().unwrap().status.code().unwrap()
}

#[test]
fn simulate_writes_n_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = patched(dir.path(), "table1_row1.json", serde_json::json!({"n": 100}));
    let out = dir.path().join("s.csv");
    assert_eq!(status(bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&out)), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 100);
    assert!(text.lines().all(|l| !l.contains(',') && l.parse::<f64>().unwrap() > 0.0));
    let m: RunManifest = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m.subcommand, "simulate");
    assert_eq!(m.seed, 20240101);

    // Same seed, same bytes; a seed override changes them.
    let again = dir.path().join("t.csv");
    bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&again).status().unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
    let other = dir.path().join("u.csv");
    bin().args(["simulate", "--seed", "5", "--config"]).arg(&cfg).arg("--out").arg(&other).status().unwrap();
    assert_ne!(std::fs::read(&out).unwrap(), std::fs::read(&other).unwrap());
}

#[test]
fn bivariate_simulate_has_two_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = patched(dir.path(), "table3_mix1_m2.json", serde_json::json!({"n": 50}));
    let out = dir.path().join("b.csv");
    assert_eq!(status(bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&out)), 0);
    let s = read_csv_file(&out).unwrap();
    assert_eq!((s.len(), s.dim()), (50, 2));
}

#[test]
fn estimate_round_trip_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = patched(dir.path(), "table1_row2.json", serde_json::json!({"n": 3000}));
    let data = dir.path().join("d.csv");
    let out = dir.path().join("e.json");
    assert_eq!(status(bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&data)), 0);
    assert_eq!(
        status(bin().args(["estimate", "--asymptotics", "--data"]).arg(&data).arg("--config").arg(&cfg).arg("--out").arg(&out)),
        0
    );
    let got: EstimateOutput = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();

    let c: ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(&cfg).unwrap()).unwrap();
    let sample = c.simulate(0).unwrap();
    assert_eq!(read_csv_file(&data).unwrap(), sample);
    let want = estimate_output(&sample, &c, true).unwrap();
    assert_eq!(got.result.phi_hat, want.result.phi_hat);
    assert_eq!(got.result.objective, want.result.objective);
    assert!(got.asymptotics.is_some());
    assert!(dir.path().join("e.json.manifest.json").exists());
}

#[test]
fn malformed_inputs_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("table1_row1.json");
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let out = dir.path().join("o.json");
    let est = |data: &Path| status(bin().args(["estimate", "--data"]).arg(data).arg("--config").arg(&cfg).arg("--out").arg(&out));
    assert_eq!(est(&empty), 2);
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "0.1\nabc\n").unwrap();
    let o = bin().args(["estimate", "--data"]).arg(&bad).arg("--config").arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    // Two columns against a univariate model.
    let wide = dir.path().join("wide.csv");
    std::fs::write(&wide, "0.1,0.2\n0.3,0.4\n").unwrap();
    assert_eq!(est(&wide), 2);
    assert_eq!(est(&dir.path().join("missing.csv")), 4);

    let zero = patched(dir.path(), "table1_row1.json", serde_json::json!({"runs": 0}));
    assert_eq!(status(bin().args(["experiment", "--config"]).arg(&zero).arg("--out").arg(dir.path().join("x"))), 2);
    assert_eq!(status(bin().args(["frobnicate"])), 2);
    assert_eq!(status(bin().args(["simulate", "--divergence", "renyi", "--config"]).arg(&cfg).arg("--out").arg(&out)), 2);
    assert_eq!(status(bin().arg("--help")), 0);
}

#[test]
fn experiment_writes_table_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = patched(dir.path(), "table1_row1.json", serde_json::json!({"runs": 3, "n": 2000}));
    let out = dir.path().join("exp");
    assert_eq!(status(bin().args(["experiment", "--threads", "2", "--config"]).arg(&cfg).arg("--out").arg(&out)), 0);
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0], "parameter,truth,mean,sd");
    assert!(rows[1].starts_with("lambda,"));
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 3 * 3);
    assert!(out.join("report.json").exists());
    let m: RunManifest = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.subcommand, "experiment");
    assert_eq!(m.config["runs"], 3);
}

#[test]
fn region_config_emits_region_csv() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("fig1_scan.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["region_scan"]["lambda_points"] = 12.into();
    v["region_scan"]["theta_points"] = 10.into();
    let cfg = dir.path().join("fig.json");
    std::fs::write(&cfg, v.to_string()).unwrap();
    let out = dir.path().join("fig");
    assert_eq!(status(bin().args(["experiment", "--config"]).arg(&cfg).arg("--out").arg(&out)), 0);
    let csv = std::fs::read_to_string(out.join("region.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("lambda,theta,phi_plus,phi_plus_plus"));
    let cells: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(cells.len(), 120);
    // Φ⁺⁺ ⊆ Φ⁺.
    assert!(cells.iter().all(|c| c[3] <= c[2]));
    assert!(out.join("manifest.json").exists());
}
