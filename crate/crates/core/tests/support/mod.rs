//! Shared helpers for the integration suites.

#![allow(dead_code)]

pub mod gen;
pub mod oracle;
pub mod props;
pub mod toys;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(rel: &str) -> PathBuf {
    fixtures().join(rel)
}

pub fn script(name: &str) -> String {
    fixture("extractors").join(name).to_string_lossy().into_owned()
}

pub fn archreco(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_archreco"))
        .args(args)
        .env("ARCHRECO_LOG", "error")
        .output()
        .expect("binary runs")
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Removes every `$uuids` member, recursively.
pub fn strip_uuids(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.shift_remove("$uuids");
            map.values_mut().for_each(strip_uuids);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_uuids),
        _ => {}
    }
}
