#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn parenting(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parenting"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn ok(args: &[&str]) -> Output {
    let out = parenting(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small model so each training invocation takes a second or two.
pub fn tiny_config(dir: &Path) -> PathBuf {
    let path = dir.join("tiny.toml");
    fs::write(
        &path,
        "batch_size = 8\nmax_len = 25\n\n[model]\nword_dim = 12\nattr_dim = 6\npos_dim = 3\nentity_dim = 3\nhidden = 16\n",
    )
    .unwrap();
    path
}

pub fn make_data(dir: &Path, count: usize, h: f64, o: f64) -> PathBuf {
    let out = dir.join(format!("data_{count}_{h}_{o}"));
    ok(&[
        "make-data",
        "--count",
        &count.to_string(),
        "--hallucination",
        &h.to_string(),
        "--omission",
        &o.to_string(),
        "--seed",
        "13",
        "--out",
        s(&out),
    ]);
    out
}

pub fn line_count(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count()
}

/// Every file under `dir` except manifests, which record wall-clock time.
pub fn tree_without_manifests(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file() && !p.to_string_lossy().ends_with("manifest.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}
