use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn opelab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opelab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn power_count_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = opelab(&["power-count"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("power-count.json"));
    assert_eq!(v["pass"], true);
    assert!(v["report"]["report"]["terms"].as_u64().unwrap() > 0);
    let hash = v["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    let cfg = fs::read_to_string(dir.path().join("power-count.config.toml")).unwrap();
    assert!(cfg.starts_with(&format!("# config_hash = {hash}")));
}

#[test]
fn lemma_check_reports_local_constant() {
    let dir = tempfile::tempdir().unwrap();
    let o = opelab(
        &["lemma-check", "--lemma", "local_l1", "--d", "1", "--alpha", "0", "--anchors", "10"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("lemma-check.json"));
    assert_eq!(v["report"]["constant"], 4.0);
}

#[test]
fn missing_seed_is_a_config_error_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = opelab(&["pinsum"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("global.seed"));
    assert!(!out.exists());
}

#[test]
fn unknown_config_key_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[global]\nseed = 3\nbogus = 1\n").unwrap();
    let out = dir.path().join("out");
    let o = opelab(&["pinsum", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(!out.exists());
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[global]\nseed = 3\n\n[pinsum]\nconfigs = 50\nmax_p = 4\n").unwrap();
    let o = opelab(&["pinsum", "--config", cfg.to_str().unwrap(), "--max-p", "5"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("pinsum.json"));
    assert_eq!(v["report"]["configs"], 50);
    assert_eq!(v["report"]["counts"].as_array().unwrap().len(), 4);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["wick2", "--seed", "5", "--samples", "40", "--n-per-side", "1024", "--r=-2,-3"];
    assert_eq!(opelab(&args, a.path()).status.code(), Some(0));
    assert_eq!(opelab(&[&args[..], &["--workers", "1"]].concat(), b.path()).status.code(), Some(0));
    for f in ["wick2.json", "wick2.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn failed_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // An impossible tolerance turns the covariance fit into a failure.
    let o = opelab(
        &["covariance", "--seed", "1", "--n-per-side", "4096", "--box-length", "64", "--samples", "20", "--tolerance", "0"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(dir.path().join("covariance.csv").exists());
}

#[test]
fn numerical_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // The mollifier at r = -12 is below two lattice spacings.
    let o = opelab(&["wick2", "--seed", "1", "--n-per-side", "256", "--r=-12", "--samples", "4"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn out_dir_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_opelab"))
        .args(["kappa-calibrate", "--d", "1", "--dim-phi", "0.25"])
        .env("OPELAB_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("kappa-calibrate.json"));
    assert_eq!(v["report"]["selected"], "formula_over_two_pi_d");
}
