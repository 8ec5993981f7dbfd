use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_svi-lab");

fn svi_lab(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("SVI_LAB_OUT_DIR");
    if let Some(d) = out_dir {
        cmd.env("SVI_LAB_OUT_DIR", d);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("exp.cfg");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL_ENERGY: &str = "experiment.kind = energy\nspace.preset = path_4\npotential.kind = zhang\nnoise.kind = diagonal\nrun.paths = 20\nrun.steps = 8\n";

#[test]
fn presets_lists_every_family() {
    let out = svi_lab(&["presets"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["single", "path_", "complete_", "frac("] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn validate_reports_all_issues_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "experiment.kind = svi\nspace.preset = path_4\nrun.epsilon = 1.5\nfoo.bar = 1\n");
    let out = svi_lab(&["validate", &cfg], None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3: run.epsilon: epsilon must lie in (0,1), got 1.5"), "{err}");
    assert!(err.contains("line 4"), "{err}");
    assert!(err.contains("potential"), "{err}");
    assert!(err.contains("noise"), "{err}");
}

#[test]
fn validate_prints_canonical_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_ENERGY);
    let out = svi_lab(&["validate", "--seed", "9", &cfg], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("run.seed = 9"), "{text}");
    let again = write_config(dir.path(), &text);
    let second = svi_lab(&["validate", &again], None);
    assert_eq!(String::from_utf8(second.stdout).unwrap(), text);
}

#[test]
fn run_writes_manifest_into_env_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_ENERGY);
    let out_dir = dir.path().join("artifacts");
    let out = svi_lab(&["run", &cfg, "--threads", "2"], Some(&out_dir));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("experiment = energy"), "{manifest}");
    assert!(manifest.contains("passed = true"), "{manifest}");
    assert!(out_dir.join("energy.report.txt").exists());
    assert!(out_dir.join("energy.csv").exists());
}

#[test]
fn failing_report_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "experiment.kind = assumptions\npotential.kind = porous_medium\npotential.gamma = 2\n");
    let out_dir = dir.path().join("out");
    let out = svi_lab(&["run", &cfg, "--out-dir", out_dir.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    let report = fs::read_to_string(out_dir.join("assumptions.report.txt")).unwrap();
    assert!(report.contains("passed = false"), "{report}");
}

#[test]
fn missing_config_file_exits_two() {
    let out = svi_lab(&["run", "/nonexistent/exp.cfg"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("/nonexistent/exp.cfg"));
}
