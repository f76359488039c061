use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rydnm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydnm")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn presets_lists_all_five() {
    let out = rydnm(&["presets"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig2a", "fig2b", "fig2c", "fig3", "fig4"] {
        assert!(text.contains(name), "{text}");
    }
    assert!(text.contains("J=3.162"));

    let out = rydnm(&["presets", "--json"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let docs: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    assert_eq!(docs.len(), 5);
    assert_eq!(docs[3]["lasers"]["delta_p_MHz_over_2pi"].as_f64().unwrap(), -50.0);
}

#[test]
fn run_preset_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = rydnm(&["run", "--preset", "fig2c", "--t-max-us", "0.5", "--stride", "50", "--out-dir", out_dir]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("fig2c_trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t_us,pop1_rho1,pop2_rho1,pop_e_rho1,pop_r_rho1,pop1_rho2,D_S,sigma_S_per_us,D_full,trace_defect"
    );
    // 0.5 μs at 50 × 1e-4 μs per sample
    assert_eq!(lines.count(), 101);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fig2c_summary.json")).unwrap()).unwrap();
    assert!(summary["N"].as_f64().unwrap() < 0.02);
    assert_eq!(summary["t_max_us"].as_f64().unwrap(), 0.5);
}

#[test]
fn run_config_file_uses_its_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("results");
    let cfg = format!(
        r#"{{"preset": "fig3", "name": "short", "integrator": {{"t_max_us": 0.2}}, "output": {{"out_dir": {:?}, "trajectory_csv": false}}}}"#,
        target.to_str().unwrap()
    );
    let path = write(dir.path(), "cfg.json", &cfg);
    let out = rydnm(&["run", &path]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(target.join("short_summary.json").exists());
    assert!(!target.join("short_trajectory.csv").exists());
}

#[test]
fn config_errors_exit_one_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"geometry": {"R_um": -1, "RD1_um": 2.0, "RD2_um": 3.0}}"#);
    let out = rydnm(&["validate", &bad]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("geometry.R_um"), "{}", stderr(&out));

    let out = rydnm(&["run", "--preset", "fig3", "--dt-us", "0"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("integrator.dt_us"), "{}", stderr(&out));

    let unknown = write(dir.path(), "unknown.json", r#"{"preset": "fig3", "lasers": {"omega_q": 1}}"#);
    let out = rydnm(&["run", &unknown]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("omega_q"));

    assert_eq!(code(&rydnm(&["run", "/nonexistent/cfg.json"])), 1);
    assert_eq!(code(&rydnm(&["run", "--preset", "fig9"])), 1);
    assert_eq!(code(&rydnm(&["run"])), 1);
    assert_eq!(code(&rydnm(&["frobnicate"])), 1);
}

#[test]
fn too_coarse_step_is_a_config_error() {
    let out = rydnm(&["run", "--preset", "fig3", "--dt-us", "0.01", "--stride", "1", "--t-max-us", "0.1"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
}

#[test]
fn validate_prints_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "cfg.json", r#"{"preset": "fig4"}"#);
    let out = rydnm(&["validate", &path]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["geometry"]["R_um"].as_f64().unwrap(), 9.5);
    assert_eq!(doc["lasers"]["delta_p_MHz_over_2pi"].as_f64().unwrap(), -20.0);
}

#[test]
fn integrator_abort_exits_two_with_flagged_summary() {
    // Round-off alone leaves a trace defect of order 1e-16 after the first
    // steps, so an absurdly strict trace tolerance forces an abort.
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "strict.json",
        r#"{"preset": "fig3", "name": "strict", "integrator": {"t_max_us": 0.1, "tolerances": {"trace": 1e-300}}}"#,
    );
    let out = rydnm(&["run", &path, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("strict_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["trajectory"], "rho1");
    assert!(summary["error"].as_str().unwrap().contains("density-matrix manifold"));
    assert!(summary["abort_time_us"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["partial"], true);
    assert_eq!(summary["abort_diagnostics"]["trace_violation"], true);
    assert!(!dir.path().join("strict_trajectory.csv").exists());
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "sweep.json",
        r#"{"name": "probe", "base": {"preset": "fig2a"}, "parameters": [{"name": "omega_p", "values": [1.2, 6, 20]}]}"#,
    );
    let out_dir = dir.path().join("maps");
    let out = rydnm(&["sweep", &spec, "--t-max-us", "0.5", "--threads", "2", "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(out_dir.join("probe.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "cell,omega_p,N,dephasing_half_life_us,steady_pop1,status");
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.ends_with(",ok")));

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"base": {"preset": "fig2a"}, "parameters": [{"name": "omega_x", "values": [1]}]}"#,
    );
    assert_eq!(code(&rydnm(&["sweep", &bad])), 1);
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["direct_couplings.json", "geometry_override.json"] {
        let out = rydnm(&["validate", dir.join(name).to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
    }
    for name in ["probe_detuning_sweep.json", "detector_distance_map.json"] {
        let spec = rydnm::scenario::parse_sweep(&fs::read_to_string(dir.join(name)).unwrap()).unwrap();
        rydnm::scenario::SweepPlan::new(&spec).unwrap();
    }
}
