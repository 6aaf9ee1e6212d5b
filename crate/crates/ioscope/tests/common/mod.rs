#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ioscope::inputs::load_containers;
use ioscope_core::{Corpus, MethodRef, Origin};
use serde_json::Value;

pub const ALL_PROJECTS: &[&str] = &[
    "pure", "time", "files", "net", "reflect", "junit5", "custom", "missing", "bridge", "iface", "foreign",
    "noentry",
];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(rel: &str) -> PathBuf {
    fixtures().join(rel)
}

pub fn manifest() -> Value {
    let text = std::fs::read_to_string(fixture("manifest.json")).expect("manifest.json");
    serde_json::from_str(&text).expect("manifest parses")
}

pub fn mref(s: &str) -> MethodRef {
    s.parse().unwrap_or_else(|e| panic!("{s}: {e:?}"))
}

pub fn runtime_paths() -> Vec<PathBuf> {
    vec![fixture("runtime/java.base"), fixture("runtime/jdk.unsupported")]
}

pub fn dep_paths(project: &str) -> Vec<PathBuf> {
    match project {
        "junit5" => vec![fixture("deps/junit.jar"), fixture("deps/util.jar")],
        _ => Vec::new(),
    }
}

/// Project classes first, then dependencies, then the runtime.
pub fn project_corpus(project: &str) -> Corpus {
    let mut all = load_containers(&[fixture(&format!("projects/{project}"))], Origin::Project).unwrap();
    all.extend(load_containers(&dep_paths(project), Origin::Dependency).unwrap());
    all.extend(load_containers(&runtime_paths(), Origin::Runtime).unwrap());
    assert!(all.errors.is_empty(), "{:?}", all.errors);
    Corpus::new(all.classes)
}

pub fn sample_db() -> ioscope_core::CategoryDb {
    ioscope::inputs::load_db(&fixture("db/sample.tsv")).unwrap()
}

pub fn ioscope(args: &[String]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ioscope")).args(args).output().expect("run ioscope")
}

pub fn runtime_args() -> Vec<String> {
    runtime_paths().iter().flat_map(|p| ["--runtime".to_string(), p.display().to_string()]).collect()
}

/// `--project NAME=PATH` for each name plus every dependency and the runtime.
pub fn project_args(names: &[&str]) -> Vec<String> {
    let mut args = Vec::new();
    for n in names {
        args.push("--project".into());
        args.push(format!("{n}={}", fixture(&format!("projects/{n}")).display()));
    }
    let mut deps: Vec<PathBuf> = names.iter().flat_map(|n| dep_paths(n)).collect();
    deps.sort();
    deps.dedup();
    for d in deps {
        args.push("--dep".into());
        args.push(d.display().to_string());
    }
    args.extend(runtime_args());
    args
}

pub fn strings(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect()
}
