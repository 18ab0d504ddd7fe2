#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub fn fixture(name: &str) -> String {
    repo_path("fixtures").join(name).to_string_lossy().into_owned()
}

pub fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("binsmith-cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

pub fn binsmith(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binsmith"))
        .args(args)
        .env_remove("BINSMITH_LOOKUP")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}
