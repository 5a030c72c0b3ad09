use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn cvclone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvclone"))
        .args(args)
        .env_remove("CVCLONE_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cvclone-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn numbers(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn amplifier_clone_fidelities() {
    let out = cvclone(&["clone", "--n", "1", "--m", "2", "--impl", "amplifier", "--input", "coherent:1,0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(numbers(&v["fidelity"]), vec![0.666666666667; 2]);
    assert_eq!(v["bound_saturated"], true);
    assert_eq!(numbers(&v["anticlone_mean"]), vec![1.0, -0.5]);
}

#[test]
fn n_to_m_excess_noise() {
    let v = json(&cvclone(&["clone", "--n", "2", "--m", "3", "--impl", "ntom", "--input", "coherent:0,0"]));
    assert_eq!(numbers(&v["clone_excess_x"]), vec![0.166666666667; 3]);
    assert_eq!(numbers(&v["clone_excess_p"]), vec![0.166666666667; 3]);
}

#[test]
fn bounds_at_infinity() {
    let v = json(&cvclone(&["clone", "--impl", "bounds", "--n", "1", "--m", "inf"]));
    assert_eq!((v["variance_bound"].as_f64(), v["fidelity_bound"].as_f64()), (Some(1.0), Some(0.5)));
    assert_eq!(v["m"], "inf");
    let v = json(&cvclone(&["clone", "--impl", "bounds", "--n", "2", "--m", "5"]));
    assert_eq!((v["m"].as_u64(), v["variance_bound"].as_f64()), (Some(5), Some(0.3)));
}

#[test]
fn clone_usage_errors() {
    for args in [
        &["clone", "--input", "coherent:1"][..],
        &["clone", "--n", "2", "--m", "3", "--impl", "circuit"],
        &["clone", "--n", "3", "--m", "2"],
        &["clone", "--m", "inf", "--impl", "ntom"],
        &["clone", "--impl", "squeezed", "--input", "vacuum"],
    ] {
        let out = cvclone(args);
        assert_eq!(out.status.code(), Some(64), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn clone_csv_and_sampling() {
    let out = cvclone(&["clone", "--samples", "2000", "--seed", "3", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("clone,excess_x,excess_p,fidelity,sampled_var_x,sampled_var_p\n"));
    assert_eq!(text.lines().count(), 3);
    assert!(!text.contains('\r'));
}

#[test]
fn qkd_baseline_and_attack() {
    let out = cvclone(&["qkd", "--v", "0.25", "--rounds", "200000"]);
    assert_eq!(out.status.code(), Some(0));
    let line = String::from_utf8(out.stdout).unwrap();
    assert!(line.starts_with("I=1 I_AB=0.99"), "{line}");

    let dir = scratch("qkd");
    let out = cvclone(&[
        "qkd", "--v", "0.25", "--noise-b", "0.5", "--rounds", "200000", "--out-dir", dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let line = String::from_utf8(out.stdout).unwrap();
    assert!(line.contains("I_AE≤0.5"), "{line}");
    let info: Value = serde_json::from_str(&fs::read_to_string(dir.join("info.json")).unwrap()).unwrap();
    assert!((info["empirical_i_ab"].as_f64().unwrap() - 0.5).abs() < 3.0 * info["stderr_i_ab"].as_f64().unwrap());
    assert_eq!(info["i_ae"].as_f64(), Some(0.5));
    let transcript = fs::read_to_string(dir.join("transcript.csv")).unwrap();
    assert!(transcript.starts_with("round,alice_basis,r,bob_basis,r_prime,kept\n"));
    assert_eq!(transcript.lines().count(), 200_001);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn qkd_requires_squeezing() {
    let out = cvclone(&["qkd", "--v", "0.6", "--rounds", "1000"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("requires squeezing (v < 1/2)"));
}

#[test]
fn qkd_files_are_reproducible() {
    let run = |tag: &str| {
        let dir = scratch(tag);
        let out = cvclone(&["qkd", "--v", "0.125", "--noise-b", "0.25", "--rounds", "5000", "--seed", "11",
            "--out-dir", dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let files = (fs::read(dir.join("transcript.csv")).unwrap(), fs::read(dir.join("info.json")).unwrap());
        fs::remove_dir_all(dir).unwrap();
        files
    };
    assert_eq!(run("rep-a"), run("rep-b"));
}

#[test]
fn oracle_runs() {
    let v = json(&cvclone(&["oracle"]));
    for f in numbers(&v["fidelity"]) {
        assert!((f - 2.0 / 3.0).abs() <= 0.01);
    }
    assert_eq!(v["passed"], true);

    let out = cvclone(&["oracle", "--grid", "32"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);

    assert_eq!(cvclone(&["oracle", "--extent", "0"]).status.code(), Some(64));
    assert_eq!(cvclone(&["oracle", "--grid", "64", "--extent", "1.5"]).status.code(), Some(64));
}

#[test]
fn verify_passes_and_detects_injected_fault() {
    let out = cvclone(&["verify", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains("FAIL"));

    let out = cvclone(&["verify", "--seed", "42", "--break-gain", "1.9"]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().find(|l| l.starts_with("circuit/amplifier equivalence")).unwrap();
    assert!(row.contains("FAIL"), "{row}");

    let out = cvclone(&["verify", "--seed", "42", "--break-gain", "1.9", "--format", "json"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    let failed: Vec<_> = v["checks"].as_array().unwrap().iter().filter(|c| c["status"] == "FAIL").collect();
    assert!(failed.iter().any(|c| c["check"] == "circuit/amplifier equivalence"));
}

#[test]
fn config_file_env_and_flag_precedence() {
    let dir = scratch("config");
    let conf = dir.join("run.conf");
    fs::write(&conf, "samples = 100\nseed = 5\nformat = json\n").unwrap();
    let conf = conf.to_str().unwrap();

    let seed_of = |out: Output| json(&out)["seed"].as_u64().unwrap();
    assert_eq!(seed_of(cvclone(&["--config", conf, "clone"])), 5);
    assert_eq!(seed_of(cvclone(&["--config", conf, "clone", "--seed", "8"])), 8);

    let with_env = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_cvclone")).args(args).env("CVCLONE_SEED", "77").output().unwrap()
    };
    assert_eq!(seed_of(with_env(&["clone", "--samples", "100"])), 77);
    assert_eq!(seed_of(with_env(&["--config", conf, "clone"])), 5);
    assert_eq!(seed_of(cvclone(&["clone", "--samples", "100"])), 42);

    let json_conf = dir.join("run.json");
    fs::write(&json_conf, r#"{"v": 0.25, "rounds": 2000, "noise_b": 0.5}"#).unwrap();
    let out = cvclone(&["--config", json_conf.to_str().unwrap(), "qkd"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    fs::write(&json_conf, r#"{"colour": "blue"}"#).unwrap();
    assert_eq!(cvclone(&["--config", json_conf.to_str().unwrap(), "qkd"]).status.code(), Some(64));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn report_to_file() {
    let dir = scratch("out");
    let path = dir.join("report.csv");
    let out = cvclone(&["oracle", "--grid", "32", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("quantity,grid,analytic,deviation,pass\n"));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(cvclone(&["--help"]).status.code(), Some(0));
    assert_eq!(cvclone(&["--version"]).status.code(), Some(0));
    assert_eq!(cvclone(&[]).status.code(), Some(64));
}
