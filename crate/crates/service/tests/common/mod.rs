#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use topictrap_service::api::ApiSettings;
use topictrap_service::server::api_settings;
use topictrap_service::store::Engine;
use topictrap_service::{build, ServiceConfig};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").canonicalize().unwrap()
}

/// A deployment over copies of the fixture inputs; outputs stay in `dir`.
pub struct Deployment {
    pub dir: tempfile::TempDir,
    pub config_path: PathBuf,
}

impl Deployment {
    pub fn new() -> Self {
        Self::with_inputs(|_| {})
    }

    /// Copies the fixture inputs into a fresh directory, lets `edit` change
    /// them, and writes a config pointing at the copies.
    pub fn with_inputs(edit: impl FnOnce(&Path)) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let inputs = dir.path().join("inputs");
        copy_dir(&fixtures(), &inputs);
        edit(&inputs);
        let config_path = dir.path().join("topictrap.toml");
        fs::write(
            &config_path,
            r#"languages = ["en", "de", "fr"]

[paths]
ontology = "inputs/ontology.jsonl"
manual_edges = "inputs/manual_edges.jsonl"
resources = "inputs/resources.jsonl"
cache_dir = "inputs/definitions"
corpus = "out/corpus.json"
relatives = "out/relatives.jsonl"
index_dir = "out/index"

[server]
reload_interval_ms = 100
"#,
        )
        .unwrap();
        Deployment { dir, config_path }
    }

    pub fn config(&self) -> ServiceConfig {
        ServiceConfig::load(&self.config_path).unwrap()
    }

    pub fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    pub fn inputs(&self) -> PathBuf {
        self.dir.path().join("inputs")
    }

    /// Runs the three offline build steps in-process.
    pub fn build(&self) -> String {
        let config = self.config();
        build::corpus(&config, Some(topictrap_core::corpus::FetchMode::Offline)).unwrap();
        build::relatives(&config).unwrap();
        build::index(&config).unwrap().generation
    }

    /// Runs the three offline build steps through the `topictrap` binary.
    pub fn build_with_binary(&self) {
        for step in [&["build-corpus", "--offline"][..], &["build-relatives"], &["build-index"]] {
            let out = std::process::Command::new(bin())
                .arg("--config")
                .arg(&self.config_path)
                .args(step)
                .env("RUST_LOG", "off")
                .output()
                .unwrap();
            assert!(out.status.success(), "{step:?}: {}", String::from_utf8_lossy(&out.stderr));
        }
    }

    pub fn engine(&self) -> Engine {
        Engine::load(&self.config().paths.index_dir).unwrap()
    }

    pub fn settings(&self) -> ApiSettings {
        api_settings(&self.config())
    }
}

pub fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

/// Every file under `dir` with its bytes, keyed by relative path.
pub fn snapshot(dir: &Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_topictrap")
}
