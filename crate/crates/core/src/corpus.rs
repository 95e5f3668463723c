//! Per-language definition texts of ontology terms.
//!
//! Definitions are fetched from the urls stored on the ontology nodes,
//! reduced to the referenced section, cleaned to plain text and cached on
//! disk. Offline mode reads the cache only, so builds and tests never touch
//! the network.

mod markup;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

pub use crate::ontology::DefinitionRef;
use crate::ontology::{Ontology, TermUri};
pub use markup::{clean_markup, extract_section, SectionScope};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FetchMode {
    Online,
    Offline,
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("network error for {url}: {message}")]
    Network { url: String, message: String },
    #[error("section `{fragment}` not found in {url}")]
    SectionNotFound { url: String, fragment: String },
    #[error("no cached definition for `{uri}` ({lang})")]
    CacheMiss { uri: TermUri, lang: String },
    #[error("definition of `{uri}` ({lang}) is empty after cleaning")]
    EmptyDefinition { uri: TermUri, lang: String },
    #[error("invalid definition reference: {0}")]
    InvalidRef(String),
    #[error("cache error in {path}: {message}")]
    Cache { path: String, message: String },
}

/// Source of raw pages for online fetches.
pub trait PageSource: Sync {
    fn get(&self, url: &Url) -> Result<String, FetchError>;
}

/// Plain HTTP page source.
pub struct HttpSource {
    agent: ureq::Agent,
}

pub const USER_AGENT: &str = concat!(
    "topictrap-definition-fetcher/",
    env!("CARGO_PKG_VERSION"),
    " (builds related-topic suggestions from definition texts)"
);

impl HttpSource {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .user_agent(USER_AGENT)
            .max_redirects(10)
            .build()
            .into();
        HttpSource { agent }
    }
}

impl PageSource for HttpSource {
    fn get(&self, url: &Url) -> Result<String, FetchError> {
        let network = |e: ureq::Error| FetchError::Network { url: url.to_string(), message: e.to_string() };
        let mut response = self.agent.get(url.as_str()).call().map_err(network)?;
        response.body_mut().read_to_string().map_err(network)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub uri: TermUri,
    pub lang: String,
    pub url: String,
    pub file: String,
    pub fetched_at: String,
}

const MANIFEST: &str = "manifest.json";

/// On-disk cache: one `.txt` file per (uri, lang) plus `manifest.json`.
#[derive(Debug)]
pub struct DefinitionCache {
    dir: PathBuf,
    entries: BTreeMap<(TermUri, String), ManifestEntry>,
}

fn cache_err(path: &Path, e: impl std::fmt::Display) -> FetchError {
    FetchError::Cache { path: path.display().to_string(), message: e.to_string() }
}

impl DefinitionCache {
    /// Opens the cache in `dir`; a missing directory or manifest is an empty cache.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, FetchError> {
        let dir = dir.into();
        let manifest = dir.join(MANIFEST);
        let mut entries = BTreeMap::new();
        if manifest.exists() {
            let raw = fs::read_to_string(&manifest).map_err(|e| cache_err(&manifest, e))?;
            let list: Vec<ManifestEntry> = serde_json::from_str(&raw).map_err(|e| cache_err(&manifest, e))?;
            for entry in list {
                entries.insert((entry.uri.clone(), entry.lang.clone()), entry);
            }
        }
        Ok(DefinitionCache { dir, entries })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entries(&self) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.values()
    }

    /// Cached text for a reference; the stored url must match.
    pub fn lookup(&self, def: &DefinitionRef) -> Result<String, FetchError> {
        let miss = || FetchError::CacheMiss { uri: def.uri.clone(), lang: def.lang.clone() };
        let entry = self.entries.get(&(def.uri.clone(), def.lang.clone())).ok_or_else(miss)?;
        if entry.url != def.url {
            return Err(miss());
        }
        let path = self.dir.join(&entry.file);
        fs::read_to_string(&path).map_err(|_| miss())
    }

    pub fn file_name(uri: &TermUri, lang: &str) -> String {
        const KEEP: &percent_encoding::AsciiSet = &percent_encoding::NON_ALPHANUMERIC.remove(b'_').remove(b'-');
        format!("{}.{lang}.txt", percent_encoding::utf8_percent_encode(uri.as_str(), KEEP))
    }

    /// Writes the text atomically and records it in the in-memory manifest.
    pub fn store(&mut self, def: &DefinitionRef, text: &str) -> Result<(), FetchError> {
        fs::create_dir_all(&self.dir).map_err(|e| cache_err(&self.dir, e))?;
        let file = Self::file_name(&def.uri, &def.lang);
        write_atomic(&self.dir.join(&file), text.as_bytes())?;
        self.entries.insert(
            (def.uri.clone(), def.lang.clone()),
            ManifestEntry {
                uri: def.uri.clone(),
                lang: def.lang.clone(),
                url: def.url.clone(),
                file,
                fetched_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            },
        );
        Ok(())
    }

    pub fn save_manifest(&self) -> Result<(), FetchError> {
        fs::create_dir_all(&self.dir).map_err(|e| cache_err(&self.dir, e))?;
        let list: Vec<&ManifestEntry> = self.entries.values().collect();
        let mut json = serde_json::to_string_pretty(&list).map_err(|e| cache_err(&self.dir, e))?;
        json.push('\n');
        write_atomic(&self.dir.join(MANIFEST), json.as_bytes())
    }
}

/// Write to a temporary sibling, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FetchError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| cache_err(path, e))?;
    tmp.write_all(bytes).map_err(|e| cache_err(path, e))?;
    tmp.persist(path).map_err(|e| cache_err(path, e.error))?;
    Ok(())
}

/// Fetches one definition: from the cache when offline, from `source` when
/// online (the cache is then updated).
pub fn fetch_definition(
    def: &DefinitionRef,
    mode: FetchMode,
    cache: &mut DefinitionCache,
    source: &dyn PageSource,
    scope: SectionScope,
) -> Result<String, FetchError> {
    match mode {
        FetchMode::Offline => cache.lookup(def),
        FetchMode::Online => {
            let text = fetch_remote(def, source, scope)?;
            cache.store(def, &text)?;
            Ok(text)
        }
    }
}

fn fetch_remote(def: &DefinitionRef, source: &dyn PageSource, scope: SectionScope) -> Result<String, FetchError> {
    let url = def.validate().map_err(FetchError::InvalidRef)?;
    let fragment = url.fragment().map(|f| percent_encoding::percent_decode_str(f).decode_utf8_lossy().into_owned());
    let mut page_url = url.clone();
    page_url.set_fragment(None);
    let page = source.get(&page_url)?;
    let section = extract_section(&page, fragment.as_deref(), scope).ok_or_else(|| FetchError::SectionNotFound {
        url: def.url.clone(),
        fragment: fragment.clone().unwrap_or_default(),
    })?;
    let text = clean_markup(&section);
    if text.is_empty() {
        return Err(FetchError::EmptyDefinition { uri: def.uri.clone(), lang: def.lang.clone() });
    }
    Ok(text)
}

/// Cleaned definition texts: language → term → text.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Corpus {
    langs: BTreeMap<String, BTreeMap<TermUri, String>>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("definition of `{uri}` ({lang}) is empty")]
    EmptyText { uri: TermUri, lang: String },
    #[error("`{uri}` already has a {lang} definition")]
    Duplicate { uri: TermUri, lang: String },
    #[error("corpus file {path}: {message}")]
    Io { path: String, message: String },
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, lang: &str, uri: TermUri, text: String) -> Result<(), CorpusError> {
        if text.trim().is_empty() {
            return Err(CorpusError::EmptyText { uri, lang: lang.to_string() });
        }
        let docs = self.langs.entry(lang.to_string()).or_default();
        if docs.contains_key(&uri) {
            return Err(CorpusError::Duplicate { uri, lang: lang.to_string() });
        }
        docs.insert(uri, text);
        Ok(())
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.langs.keys().map(String::as_str)
    }

    pub fn documents(&self, lang: &str) -> Option<&BTreeMap<TermUri, String>> {
        self.langs.get(lang)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeMap<TermUri, String>)> {
        self.langs.iter().map(|(l, d)| (l.as_str(), d))
    }

    /// Total number of (term, language) entries.
    pub fn len(&self) -> usize {
        self.langs.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_json(&self) -> String {
        let mut json = serde_json::to_string_pretty(self).expect("corpus serializes");
        json.push('\n');
        json
    }

    pub fn from_json(raw: &str) -> Result<Self, CorpusError> {
        let corpus: Corpus =
            serde_json::from_str(raw).map_err(|e| CorpusError::Io { path: "<json>".into(), message: e.to_string() })?;
        for (lang, docs) in &corpus.langs {
            for (uri, text) in docs {
                if text.trim().is_empty() {
                    return Err(CorpusError::EmptyText { uri: uri.clone(), lang: lang.clone() });
                }
            }
        }
        Ok(corpus)
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        write_atomic(path, self.to_json().as_bytes())
            .map_err(|e| CorpusError::Io { path: path.display().to_string(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let raw = fs::read_to_string(path)
            .map_err(|e| CorpusError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_json(&raw)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefFailure {
    pub uri: TermUri,
    pub lang: String,
    pub url: String,
    pub error: String,
}

/// Non-fatal failures of a corpus build.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub failures: Vec<RefFailure>,
}

#[derive(Clone, Debug)]
pub struct CorpusSettings {
    pub mode: FetchMode,
    pub cache_dir: PathBuf,
    pub scope: SectionScope,
    /// Maximum number of concurrent fetches (online mode).
    pub parallelism: usize,
    /// Minimum delay between two requests to the same host.
    pub politeness: Duration,
}

impl CorpusSettings {
    pub fn offline(cache_dir: impl Into<PathBuf>) -> Self {
        CorpusSettings {
            mode: FetchMode::Offline,
            cache_dir: cache_dir.into(),
            scope: SectionScope::default(),
            parallelism: 4,
            politeness: Duration::from_millis(500),
        }
    }
}

/// Per-host request spacing shared by fetch workers.
struct Politeness {
    delay: Duration,
    next: Mutex<HashMap<String, Instant>>,
}

impl Politeness {
    fn wait(&self, url: &str) {
        if self.delay.is_zero() {
            return;
        }
        let host = Url::parse(url).ok().and_then(|u| u.host_str().map(str::to_string)).unwrap_or_default();
        let wait = {
            let mut next = self.next.lock().unwrap();
            let now = Instant::now();
            let slot = next.get(&host).copied().unwrap_or(now).max(now);
            next.insert(host, slot + self.delay);
            slot - now
        };
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }
}

/// Builds the corpus from every definition reference in the ontology.
/// Failed references are recorded in the report; the build itself only
/// fails when the cache cannot be opened or written.
pub fn build_corpus(
    ontology: &Ontology,
    settings: &CorpusSettings,
    source: &dyn PageSource,
) -> Result<(Corpus, CorpusReport), FetchError> {
    let refs: Vec<&DefinitionRef> = ontology.nodes().flat_map(|n| n.definition_refs.iter()).collect();
    let mut cache = DefinitionCache::open(&settings.cache_dir)?;

    let results: Vec<Result<String, FetchError>> = match settings.mode {
        FetchMode::Offline => refs.iter().map(|d| cache.lookup(d)).collect(),
        FetchMode::Online => {
            let slots: Vec<Mutex<Option<Result<String, FetchError>>>> = refs.iter().map(|_| Mutex::new(None)).collect();
            let cursor = AtomicUsize::new(0);
            let politeness = Politeness { delay: settings.politeness, next: Mutex::new(HashMap::new()) };
            std::thread::scope(|scope| {
                for _ in 0..settings.parallelism.max(1).min(refs.len().max(1)) {
                    scope.spawn(|| loop {
                        let i = cursor.fetch_add(1, Ordering::SeqCst);
                        let Some(def) = refs.get(i) else { break };
                        politeness.wait(&def.url);
                        let result = fetch_remote(def, source, settings.scope);
                        *slots[i].lock().unwrap() = Some(result);
                    });
                }
            });
            let mut results = Vec::with_capacity(refs.len());
            for (def, slot) in refs.iter().zip(slots) {
                let result = slot.into_inner().unwrap().expect("every slot is filled");
                if let Ok(text) = &result {
                    cache.store(def, text)?;
                }
                results.push(result);
            }
            cache.save_manifest()?;
            results
        }
    };

    let mut corpus = Corpus::new();
    let mut report = CorpusReport::default();
    for (def, result) in refs.into_iter().zip(results) {
        let outcome = result
            .map_err(|e| e.to_string())
            .and_then(|text| corpus.insert(&def.lang, def.uri.clone(), text).map_err(|e| e.to_string()));
        if let Err(error) = outcome {
            log::warn!("definition of {} ({}) skipped: {error}", def.uri, def.lang);
            report.failures.push(RefFailure {
                uri: def.uri.clone(),
                lang: def.lang.clone(),
                url: def.url.clone(),
                error,
            });
        }
    }
    Ok((corpus, report))
}

/// Page source that refuses every request; used for offline builds.
pub struct NoNetwork;

impl PageSource for NoNetwork {
    fn get(&self, url: &Url) -> Result<String, FetchError> {
        Err(FetchError::Network { url: url.to_string(), message: "network access disabled".into() })
    }
}
