#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use sgr_core::mesh::{save_mesh, MeshFormat};
use sgr_core::TriangleMesh;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn sgr(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_sgr"))
        .args(args)
        .current_dir(dir)
        .env_remove("SGR_OUTPUT_DIR")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn write(dir: &Path, name: &str, mesh: &TriangleMesh) -> PathBuf {
    let p = dir.join(name);
    save_mesh(mesh, &p, MeshFormat::from_path(&p).unwrap()).unwrap();
    p
}

/// Value of a `key: value` line.
pub fn field(text: &str, key: &str) -> Option<String> {
    text.lines()
        .filter_map(|l| l.split_once(": "))
        .find(|(k, _)| k.trim() == key)
        .map(|(_, v)| v.trim().to_string())
}
