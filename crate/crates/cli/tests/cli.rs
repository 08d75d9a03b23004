use std::path::PathBuf;
use std::process::{Command, Output};

fn emsrs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emsrs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    root.to_str().unwrap().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn phase_prints_differential() {
    let out = emsrs(&["phase", "--species", "electron", "--d", "0.1nm"]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("2Δφ_S = 0.1128"), "{}", stderr(&out));
    let csv = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let diff: f64 = row[5].parse().unwrap();
    assert!((diff - 1.128e-4).abs() < 1e-7);
}

#[test]
fn beta_sweep_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = emsrs(&[
        "beta-sweep",
        "--points",
        "360",
        "--out",
        path.to_str().unwrap(),
        "--quiet",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty() && out.stderr.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("beta_rad,delta_phi_rad,visibility"));
    assert_eq!(lines.count(), 360);
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
fn estimate_reaches_bound() {
    let out = emsrs(&[
        "estimate", "--phi", "0", "--Ne", "100000", "--trials", "1000", "--seed", "42", "--format", "json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let ratio = doc["rows"][0]["variance_over_crb"].as_f64().unwrap();
    assert!((0.9..=1.3).contains(&ratio), "{ratio}");
    assert_eq!(doc["metadata"]["seed"], 42);
    assert_eq!(doc["metadata"]["command"], "estimate");
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let cfg = config("thermal_column.cfg");
        let out = emsrs(&[
            "--config",
            &cfg,
            "protocol-a",
            "--out",
            path.to_str().unwrap(),
            "--quiet",
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn seed_flag_overrides_config() {
    let cfg = config("single_spin_toggle.cfg");
    let a = emsrs(&["--config", &cfg, "protocol-a", "--quiet"]);
    let b = emsrs(&["--config", &cfg, "protocol-a", "--quiet", "--seed", "43"]);
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn json_metadata_echoes_config() {
    let cfg = config("precession.cfg");
    let out = emsrs(&["--config", &cfg, "protocol-b", "--format", "json", "--quiet"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let meta = &doc["metadata"];
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
    assert!(meta["config"].as_str().unwrap().contains("bias_axis = z"));
    assert_eq!(meta["result"]["variant"], "tip");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2 * 8 * 12);
    assert_eq!(doc["columns"][0], "stage");
}

#[test]
fn resonance_peaks_at_larmor() {
    for mode in ["magnitude", "coherent"] {
        let out = emsrs(&[
            "resonance",
            "--points",
            "21",
            "--mode",
            mode,
            "--format",
            "json",
            "--quiet",
        ]);
        assert!(out.status.success());
        let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(doc["metadata"]["result"]["argmax_index"], 10);
    }
}

#[test]
fn table_check_and_fringe_run() {
    for args in [&["table"][..], &["check", "--dz", "1nm", "--dr", "0.01nm"], &["fringe"]] {
        let out = emsrs(args);
        assert!(out.status.success(), "{args:?}: {}", stderr(&out));
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn exit_codes_by_error_class() {
    let out = emsrs(&["phase", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));

    let out = emsrs(&["phase", "--d", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[config]"));

    let out = emsrs(&["phase", "--d", "-1nm"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("error[domain]"));

    let out = emsrs(&["estimate", "--phi", "0.5pi", "--sx", "0", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("error[non_identifiable]"), "{}", stderr(&out));

    let cfg = config("single_spin_toggle.cfg");
    let out = emsrs(&["--config", &cfg, "protocol-b"]);
    assert_eq!(out.status.code(), Some(2));

    let out = emsrs(&["--config", "/definitely/missing.cfg", "fringe"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[io]"));
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "species = electron\nB0 = 1.8\n").unwrap();
    let out = emsrs(&["--config", path.to_str().unwrap(), "fringe"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}
