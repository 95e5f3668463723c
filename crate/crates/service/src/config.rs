//! Service configuration, read from a TOML file.
//!
//! Relative paths are resolved against the directory holding the file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use topictrap_core::corpus::{CorpusSettings, FetchMode, SectionScope};
use topictrap_core::lsa::{DEFAULT_K_MAX, DEFAULT_THRESHOLD};
use topictrap_core::relatives::PolicySimilarities;
use topictrap_core::SearchWeights;

use crate::error::CliError;

pub const ENV_VAR: &str = "TOPICTRAP_CONFIG";

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    pub paths: Paths,
    /// Languages for textual relatedness; the first one is the default
    /// request language.
    #[serde(default = "default_languages")]
    pub languages: Vec<String>,
    #[serde(default)]
    pub fetch: FetchConfig,
    #[serde(default)]
    pub lsa: LsaConfig,
    #[serde(default)]
    pub policy: PolicySimilarities,
    #[serde(default)]
    pub weights: SearchWeights,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub server: ServerConfig,
    /// Keep zero-count terms in the typeahead (curator tooling only).
    #[serde(default)]
    pub autocomplete_include_zero: bool,
}

fn default_languages() -> Vec<String> {
    vec!["en".to_string()]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub ontology: PathBuf,
    pub manual_edges: Option<PathBuf>,
    pub resources: PathBuf,
    pub cache_dir: PathBuf,
    /// Corpus dump written by `build-corpus`.
    pub corpus: PathBuf,
    /// Graph file written by `build-relatives`.
    pub relatives: PathBuf,
    /// Published index generations.
    pub index_dir: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FetchConfig {
    pub mode: FetchMode,
    pub section_scope: ScopeName,
    pub parallelism: usize,
    pub politeness_ms: u64,
    pub timeout_s: u64,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            mode: FetchMode::Offline,
            section_scope: ScopeName::WithSubsections,
            parallelism: 4,
            politeness_ms: 500,
            timeout_s: 20,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScopeName {
    WithSubsections,
    SectionOnly,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LsaConfig {
    pub k_max: usize,
    pub threshold: f64,
}

impl Default for LsaConfig {
    fn default() -> Self {
        LsaConfig { k_max: DEFAULT_K_MAX, threshold: DEFAULT_THRESHOLD }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Limits {
    pub autocomplete: usize,
    pub search: usize,
    pub suggest: usize,
    /// Upper bound for any client-supplied limit.
    pub max: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            autocomplete: topictrap_core::autocomplete::DEFAULT_LIMIT,
            search: 20,
            suggest: topictrap_core::suggest::DEFAULT_LIMIT,
            max: 1000,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServerConfig {
    pub bind: String,
    pub port: u16,
    /// Allowed CORS origins; empty allows any origin.
    pub cors_origins: Vec<String>,
    /// How often the server checks for a newly published index.
    pub reload_interval_ms: u64,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig { bind: "127.0.0.1".into(), port: 8080, cors_origins: Vec::new(), reload_interval_ms: 2000 }
    }
}

impl ServiceConfig {
    /// Reads and validates the file at `path`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let mut config: ServiceConfig =
            toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.paths.resolve(base);
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.languages.is_empty() {
            return Err(CliError::config("`languages` must list at least one language"));
        }
        for lang in &self.languages {
            if lang.len() != 2 || !lang.bytes().all(|b| b.is_ascii_lowercase()) {
                return Err(CliError::config(format!("invalid language code `{lang}`")));
            }
        }
        if self.lsa.k_max == 0 {
            return Err(CliError::config("lsa.k_max must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.lsa.threshold) {
            return Err(CliError::config(format!("lsa.threshold {} is outside [0, 1]", self.lsa.threshold)));
        }
        for (name, s) in [
            ("policy.parent", self.policy.parent),
            ("policy.ingredient", self.policy.ingredient),
            ("policy.level_adjacent", self.policy.level_adjacent),
        ] {
            if !(s > 0.0 && s <= 1.0) {
                return Err(CliError::config(format!("{name} {s} is outside (0, 1]")));
            }
        }
        self.weights.validate().map_err(CliError::config)?;
        if self.fetch.parallelism == 0 {
            return Err(CliError::config("fetch.parallelism must be at least 1"));
        }
        let l = &self.limits;
        if l.max == 0 || l.autocomplete > l.max || l.search > l.max || l.suggest > l.max {
            return Err(CliError::config("default limits must not exceed limits.max"));
        }
        Ok(())
    }

    pub fn default_lang(&self) -> &str {
        &self.languages[0]
    }

    pub fn corpus_settings(&self, mode: FetchMode) -> CorpusSettings {
        CorpusSettings {
            mode,
            cache_dir: self.paths.cache_dir.clone(),
            scope: match self.fetch.section_scope {
                ScopeName::WithSubsections => SectionScope::WithSubsections,
                ScopeName::SectionOnly => SectionScope::SectionOnly,
            },
            parallelism: self.fetch.parallelism,
            politeness: Duration::from_millis(self.fetch.politeness_ms),
        }
    }
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.ontology);
        if let Some(m) = self.manual_edges.as_mut() {
            join(m);
        }
        join(&mut self.resources);
        join(&mut self.cache_dir);
        join(&mut self.corpus);
        join(&mut self.relatives);
        join(&mut self.index_dir);
    }
}

/// Config path from the command line, else from the environment.
pub fn locate(cli: Option<PathBuf>) -> Result<PathBuf, CliError> {
    cli.or_else(|| std::env::var_os(ENV_VAR).map(PathBuf::from))
        .ok_or_else(|| CliError::config(format!("no config given; pass --config or set {ENV_VAR}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[paths]
ontology = "ontology.jsonl"
resources = "/abs/resources.jsonl"
cache_dir = "cache"
corpus = "out/corpus.json"
relatives = "out/relatives.jsonl"
index_dir = "out/index"
"#;

    fn write(text: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("topictrap.toml");
        fs::write(&path, text).unwrap();
        (dir, path)
    }

    #[test]
    fn defaults_and_path_resolution() {
        let (dir, path) = write(MINIMAL);
        let c = ServiceConfig::load(&path).unwrap();
        assert_eq!(c.paths.ontology, dir.path().join("ontology.jsonl"));
        assert_eq!(c.paths.resources, PathBuf::from("/abs/resources.jsonl"));
        assert_eq!(c.default_lang(), "en");
        assert_eq!(c.lsa.threshold, 0.25);
        assert_eq!(c.lsa.k_max, 100);
        assert_eq!(c.weights, SearchWeights::default());
        assert_eq!(c.policy.parent, 0.9);
        assert_eq!(c.fetch.mode, FetchMode::Offline);
        assert!(!c.autocomplete_include_zero);
    }

    #[test]
    fn rejects_bad_values() {
        for extra in [
            "languages = []",
            "languages = [\"english\"]",
            "[lsa]\nthreshold = 1.5",
            "[lsa]\nk_max = 0",
            "[weights]\ndescendant = 0.0",
            "[policy]\nparent = 2.0",
            "unknown_key = 1",
        ] {
            let (_dir, path) = write(&format!("{extra}\n{MINIMAL}"));
            let err = ServiceConfig::load(&path).unwrap_err();
            assert_eq!(err.category, crate::error::Category::Config, "{extra}");
        }
    }

    #[test]
    fn missing_file_is_a_config_error() {
        let err = ServiceConfig::load(Path::new("/nonexistent/topictrap.toml")).unwrap_err();
        assert_eq!(err.category.exit_code(), 2);
    }
}
