use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn netinf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netinf")).args(args).output().unwrap()
}

fn config_path() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/example1.toml")
        .display()
        .to_string()
}

#[test]
fn run_writes_outputs_listed_in_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let result = netinf(&["example1", "--config", &config_path(), "--out", out, "--threads", "2"]);
    assert_eq!(result.status.code(), Some(0), "{}", String::from_utf8_lossy(&result.stderr));

    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "example1");
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["threads"], 2);
    let outputs = manifest["outputs"].as_array().unwrap();
    let names: Vec<&str> = outputs.iter().map(|o| o["file"].as_str().unwrap()).collect();
    assert!(names.contains(&"example1.csv") && names.contains(&"summary.json"));
    for record in outputs {
        let bytes = fs::read(dir.path().join(record["file"].as_str().unwrap())).unwrap();
        assert_eq!(record["bytes"], bytes.len() as u64);
        assert_eq!(record["sha256"], hex::encode(Sha256::digest(&bytes)));
    }
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with(".netinf-"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let result = netinf(&["example1", "--config", &config_path(), "--out", out, "--seed", "99"]);
    assert_eq!(result.status.code(), Some(0));
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 99);
}

#[test]
fn invalid_config_exits_with_2_and_names_paths() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "seed = 1\nbogus = 3\n[model]\nn = 0\n").unwrap();
    let out = dir.path().join("out");
    let result = netinf(&["fig1", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("bogus"), "{stderr}");
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn missing_config_file_exits_with_2() {
    let result = netinf(&["auc", "--config", "/nonexistent/netinf.toml"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("noseed.toml");
    fs::write(&path, "[example1]\na = 1.0\n").unwrap();
    let out = dir.path().join("out");
    let result = netinf(&["example1", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("seed"));
}

#[test]
fn numerical_failure_exits_with_3_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("overflow.toml");
    fs::write(&path, "seed = 1\n[example1]\na = 1e160\nnoise_ratio = 0.0\n").unwrap();
    let out = dir.path().join("out");
    let result = netinf(&["example1", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(3));
    assert!(!out.join("manifest.json").exists());
}
