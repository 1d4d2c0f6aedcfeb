use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drumhead-rom"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("DRUMHEAD_OUT")
        .output()
        .expect("binary runs")
}

fn summary(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn invalid_input_exits_2_with_error_record() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["modes", "--n", "1", "--temp", "370"][..],
        &["modes", "--temp", "370", "--disorder=-0.1"],
        &["transmission", "--temp", "370", "--eps-ths", "0.01"],
        &["transmission", "--temp", "370", "--eps-sat", "0.3"],
        &["simulate", "--temp", "370", "--dt-out", "0"],
        &["bloch", "--temp-grid", "400:350:1"],
        &["modes", "--temp", "370", "--modes", "500"],
    ] {
        let out = run(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let record: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(record["status"], "error");
        assert_eq!(record["exit_code"], 2);
        assert!(dir.path().join("error.json").exists());
    }
}

#[test]
fn equilibrium_writes_manifest_with_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&run(dir.path(), &["equilibrium", "--temp", "380", "--disorder", "0.05"]));
    assert!(s["residual"].as_f64().unwrap() <= 1e-10);
    let m = manifest(dir.path());
    assert_eq!(m["spec"]["sigma_h"], 0.05);
    let files = m["files"].as_array().unwrap();
    assert_eq!(files.len(), 1);
    let text = std::fs::read_to_string(dir.path().join("equilibrium.csv")).unwrap();
    assert_eq!(text.lines().count(), 61);
    assert_eq!(files[0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn spec_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"n": 12, "temperature": 372.0, "mode_indices": [3]}"#).unwrap();
    let s = summary(&run(dir.path(), &["modes", "--n", "40", "--temp", "360", "--spec", spec.to_str().unwrap()]));
    assert_eq!(s["modes"], 24);
    assert_eq!(s["temperature_K"], 372.0);
    assert!(dir.path().join("mode_shape_3.csv").exists());

    std::fs::write(&spec, r#"{"bogus": 1}"#).unwrap();
    let out = run(dir.path(), &["modes", "--temp", "360", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_format_and_svg_plots() {
    let dir = tempfile::tempdir().unwrap();
    summary(&run(dir.path(), &["modes", "--n", "8", "--temp", "380", "--modes", "2", "--format", "json", "--plot", "svg"]));
    let rows: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("modes.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 16);
    assert!(rows[0]["f_MHz"].is_number());
    let svg = std::fs::read_to_string(dir.path().join("modes.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(dir.path().join("mode_shape_2.svg").exists());
}

#[test]
fn simulate_reports_fronts_and_conserves_energy() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&run(dir.path(), &["simulate", "--disorder", "0.05", "--temp", "390", "--t-end", "60e-6"]));
    assert_eq!(s["ic_kind"], "translational");
    assert_eq!(s["samples"], 12001);
    assert!(s["max_conservation_error"].as_f64().unwrap() <= 1e-9);
    let fast = s["fast_front_s"].as_f64().unwrap();
    assert!(fast > 10e-6 && fast < 30e-6, "{fast}");
    for f in ["time_series.csv", "energy.csv", "spectrum.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn bloch_grid_narrowest_band_near_critical_temperature() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&run(dir.path(), &["bloch", "--temp-grid", "350:400:1"]));
    let narrowest = s["band1_narrowest_K"].as_f64().unwrap();
    let t_star = s["t_star_K"].as_f64().unwrap();
    assert!((narrowest - t_star).abs() <= 1.0, "{narrowest} vs {t_star}");
    let text = std::fs::read_to_string(dir.path().join("band_edges.csv")).unwrap();
    assert_eq!(text.lines().count(), 52);
}
