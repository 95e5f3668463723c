//! Resource index: ontology query expansion, ranking and expanded counts.
//!
//! A term query is expanded before it hits the postings:
//!
//! * a topic matches itself and, at a lower weight, every more specific topic;
//! * a competency matches itself and, at a lower weight, its process and
//!   ingredient topics;
//! * a level or a process matches itself only.
//!
//! A resource scores the maximum weight of the expansion entries it is
//! annotated with. The count shown next to a term is the size of that result
//! set, so a term with a count never leads to an empty page.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::write_atomic;
use crate::ontology::{Ontology, TermError, TermKind, TermUri};
use crate::text::tokenize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resource {
    pub id: String,
    #[serde(default)]
    pub titles: BTreeMap<String, String>,
    #[serde(default)]
    pub body: BTreeMap<String, String>,
    #[serde(default)]
    pub annotations: Vec<TermUri>,
}

impl Resource {
    /// Title in `lang`, else the first title in language order.
    pub fn title(&self, lang: &str) -> Option<&str> {
        self.titles.get(lang).or_else(|| self.titles.values().next()).map(String::as_str)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    DirectTerm,
    DescendantTopic,
    IngredientMatch,
    LevelExact,
    WordMatch,
}

/// Ranking weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchWeights {
    pub descendant: f64,
    pub ingredient: f64,
    pub word_blend: f64,
}

impl Default for SearchWeights {
    fn default() -> Self {
        SearchWeights { descendant: 0.5, ingredient: 0.6, word_blend: 0.25 }
    }
}

impl SearchWeights {
    pub fn validate(&self) -> Result<(), String> {
        for (name, w) in [("descendant", self.descendant), ("ingredient", self.ingredient)] {
            if !(w > 0.0 && w <= 1.0) {
                return Err(format!("{name} weight {w} is outside (0, 1]"));
            }
        }
        if !(0.0..=1.0).contains(&self.word_blend) {
            return Err(format!("word blend {} is outside [0, 1]", self.word_blend));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expansion {
    pub uri: TermUri,
    pub weight: f64,
    pub kind: MatchKind,
}

/// Weighted terms a query on `uri` is rewritten into; the term itself first.
pub fn expand_term(ontology: &Ontology, uri: &str, weights: &SearchWeights) -> Result<Vec<Expansion>, TermError> {
    let node = ontology.node(uri)?;
    let this = |kind| Expansion { uri: node.uri.clone(), weight: 1.0, kind };
    Ok(match node.kind {
        TermKind::Topic => {
            let mut out = vec![this(MatchKind::DirectTerm)];
            out.extend(ontology.descendants(uri)?.into_iter().map(|d| Expansion {
                uri: d,
                weight: weights.descendant,
                kind: MatchKind::DescendantTopic,
            }));
            out
        }
        TermKind::Competency => {
            let (process, topics) = ontology.ingredients_of(uri)?;
            let mut out = vec![this(MatchKind::DirectTerm)];
            for ingredient in std::iter::once(process).chain(topics) {
                if out.iter().all(|e| &e.uri != ingredient) {
                    out.push(Expansion {
                        uri: ingredient.clone(),
                        weight: weights.ingredient,
                        kind: MatchKind::IngredientMatch,
                    });
                }
            }
            out
        }
        TermKind::EducationalLevel => vec![this(MatchKind::LevelExact)],
        TermKind::CompetencyProcess => vec![this(MatchKind::DirectTerm)],
    })
}

#[derive(Debug, Error, PartialEq)]
pub enum IndexError {
    #[error("duplicate resource id `{0}`")]
    DuplicateResource(String),
    #[error("resource `{resource}` is annotated with unknown term `{uri}`")]
    DanglingAnnotation { resource: String, uri: TermUri },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("stored index does not match its resources: {0}")]
    Corrupt(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("query has neither a term nor any searchable word")]
    EmptyQuery,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchHit {
    pub resource_id: String,
    pub title: Option<String>,
    pub score: f64,
    pub match_kinds: BTreeSet<MatchKind>,
    pub matched_terms: Vec<TermUri>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchPage {
    pub total: usize,
    pub offset: usize,
    pub hits: Vec<SearchHit>,
}

#[derive(Clone, Debug, Default)]
pub struct SearchQuery<'a> {
    pub term: Option<&'a str>,
    pub words: Option<&'a str>,
    pub lang: &'a str,
    pub offset: usize,
    pub limit: Option<usize>,
}

/// Word postings of one language: token → (doc, term frequency).
#[derive(Clone, Debug, Default)]
struct WordIndex {
    docs: usize,
    postings: BTreeMap<String, Vec<(u32, u32)>>,
}

/// Immutable index over annotated resources.
#[derive(Clone, Debug)]
pub struct ResourceIndex {
    weights: SearchWeights,
    /// Sorted by id; a resource's position is its doc number.
    resources: Vec<Resource>,
    postings: BTreeMap<TermUri, Vec<u32>>,
    words: BTreeMap<String, WordIndex>,
    counts: BTreeMap<TermUri, usize>,
}

/// Score, match kinds and matched terms of one document.
type TermMatch = (f64, BTreeSet<MatchKind>, Vec<TermUri>);

impl ResourceIndex {
    pub fn build(
        mut resources: Vec<Resource>,
        ontology: &Ontology,
        weights: SearchWeights,
    ) -> Result<Self, IndexError> {
        weights.validate().map_err(IndexError::InvalidWeights)?;
        resources.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(pair) = resources.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(IndexError::DuplicateResource(pair[0].id.clone()));
        }

        let mut postings: BTreeMap<TermUri, Vec<u32>> = BTreeMap::new();
        let mut words: BTreeMap<String, WordIndex> = BTreeMap::new();
        for (doc, resource) in resources.iter().enumerate() {
            let doc = doc as u32;
            for uri in &resource.annotations {
                if !ontology.contains(uri.as_str()) {
                    return Err(IndexError::DanglingAnnotation { resource: resource.id.clone(), uri: uri.clone() });
                }
                let list = postings.entry(uri.clone()).or_default();
                if list.last() != Some(&doc) {
                    list.push(doc);
                }
            }

            let langs: BTreeSet<&String> = resource.titles.keys().chain(resource.body.keys()).collect();
            for lang in langs {
                let text = [resource.titles.get(lang), resource.body.get(lang)]
                    .into_iter()
                    .flatten()
                    .map(String::as_str)
                    .collect::<Vec<_>>()
                    .join(" ");
                let mut tf: BTreeMap<String, u32> = BTreeMap::new();
                for token in tokenize(&text, lang) {
                    *tf.entry(token).or_insert(0) += 1;
                }
                let index = words.entry(lang.clone()).or_default();
                index.docs += 1;
                for (token, count) in tf {
                    index.postings.entry(token).or_default().push((doc, count));
                }
            }
        }

        let mut index = ResourceIndex { weights, resources, postings, words, counts: BTreeMap::new() };
        let counts = ontology
            .nodes()
            .map(|node| {
                let count = index.term_scores(ontology, node.uri.as_str()).expect("node exists").len();
                (node.uri.clone(), count)
            })
            .collect();
        index.counts = counts;
        Ok(index)
    }

    pub fn weights(&self) -> &SearchWeights {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn resource(&self, id: &str) -> Option<&Resource> {
        self.resources.binary_search_by(|r| r.id.as_str().cmp(id)).ok().map(|i| &self.resources[i])
    }

    /// Expanded counts for every ontology term.
    pub fn counts(&self) -> &BTreeMap<TermUri, usize> {
        &self.counts
    }

    /// Number of resources a query on `uri` returns.
    pub fn count_for_term(&self, ontology: &Ontology, uri: &str) -> Result<usize, TermError> {
        ontology.node(uri)?;
        Ok(self.counts.get(uri).copied().unwrap_or(0))
    }

    /// Per-document term score with the matching expansion entries.
    fn term_scores(&self, ontology: &Ontology, uri: &str) -> Result<BTreeMap<u32, TermMatch>, TermError> {
        let mut scores: BTreeMap<u32, TermMatch> = BTreeMap::new();
        for entry in expand_term(ontology, uri, &self.weights)? {
            for &doc in self.postings.get(&entry.uri).into_iter().flatten() {
                let slot = scores.entry(doc).or_insert_with(|| (0.0, BTreeSet::new(), Vec::new()));
                slot.0 = slot.0.max(entry.weight);
                slot.1.insert(entry.kind);
                slot.2.push(entry.uri.clone());
            }
        }
        Ok(scores)
    }

    /// Weighted disjunction: each query token found in a document adds
    /// `tf · ln(1 + N / df)`, and the sum is scaled by the fraction of query
    /// tokens present so that documents matching more words come first.
    fn word_scores(&self, words: &str, lang: &str) -> BTreeMap<u32, f64> {
        let tokens: BTreeSet<String> = tokenize(words, lang).into_iter().collect();
        let mut scores: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
        let Some(index) = self.words.get(lang) else {
            return BTreeMap::new();
        };
        for token in &tokens {
            let Some(list) = index.postings.get(token) else { continue };
            let idf = (1.0 + index.docs as f64 / list.len() as f64).ln();
            for &(doc, tf) in list {
                let slot = scores.entry(doc).or_insert((0.0, 0));
                slot.0 += tf as f64 * idf;
                slot.1 += 1;
            }
        }
        let n = tokens.len().max(1) as f64;
        scores.into_iter().map(|(doc, (sum, matched))| (doc, sum * matched as f64 / n)).collect()
    }

    /// Runs a term and/or word query. With a term, the result set is the
    /// term's expanded set and words only re-rank it; without a term, every
    /// document matching any word is returned.
    pub fn search(&self, ontology: &Ontology, query: &SearchQuery<'_>) -> Result<SearchPage, SearchError> {
        let words = query.words.filter(|w| !tokenize(w, query.lang).is_empty());
        let mut hits: Vec<(u32, SearchHit)> = match (query.term, words) {
            (None, None) => return Err(SearchError::EmptyQuery),
            (Some(term), words) => {
                let scores = self.term_scores(ontology, term)?;
                let word_scores = words.map(|w| self.word_scores(w, query.lang)).unwrap_or_default();
                let in_set: Vec<f64> = scores.keys().map(|d| word_scores.get(d).copied().unwrap_or(0.0)).collect();
                let lo = in_set.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = in_set.iter().copied().fold(0.0, f64::max);
                scores
                    .into_iter()
                    .map(|(doc, (score, mut kinds, matched))| {
                        let w = word_scores.get(&doc).copied().unwrap_or(0.0);
                        let normalized = if hi > lo {
                            (w - lo) / (hi - lo)
                        } else if w > 0.0 {
                            1.0
                        } else {
                            0.0
                        };
                        if w > 0.0 {
                            kinds.insert(MatchKind::WordMatch);
                        }
                        let score = score + self.weights.word_blend * normalized;
                        (doc, self.hit(doc, query.lang, score, kinds, matched))
                    })
                    .collect()
            }
            (None, Some(words)) => self
                .word_scores(words, query.lang)
                .into_iter()
                .map(|(doc, score)| {
                    let kinds = BTreeSet::from([MatchKind::WordMatch]);
                    (doc, self.hit(doc, query.lang, score, kinds, Vec::new()))
                })
                .collect(),
        };
        hits.sort_by(|(da, a), (db, b)| b.score.total_cmp(&a.score).then(da.cmp(db)));
        let total = hits.len();
        let limit = query.limit.unwrap_or(usize::MAX);
        let hits = hits.into_iter().skip(query.offset).take(limit).map(|(_, h)| h).collect();
        Ok(SearchPage { total, offset: query.offset, hits })
    }

    fn hit(
        &self,
        doc: u32,
        lang: &str,
        score: f64,
        kinds: BTreeSet<MatchKind>,
        mut matched: Vec<TermUri>,
    ) -> SearchHit {
        let resource = &self.resources[doc as usize];
        matched.sort();
        matched.dedup();
        SearchHit {
            resource_id: resource.id.clone(),
            title: resource.title(lang).map(str::to_string),
            score,
            match_kinds: kinds,
            matched_terms: matched,
        }
    }

    /// Word-only query.
    pub fn word_search(&self, words: &str, lang: &str, limit: usize) -> Result<Vec<SearchHit>, SearchError> {
        let empty = Ontology::default();
        let query = SearchQuery { term: None, words: Some(words), lang, offset: 0, limit: Some(limit) };
        Ok(self.search(&empty, &query)?.hits)
    }

    /// Writes `index.json`, `resources.jsonl` and `counts.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), IndexError> {
        let io = |e: &dyn std::fmt::Display| IndexError::Io { path: dir.display().to_string(), message: e.to_string() };
        fs::create_dir_all(dir).map_err(|e| io(&e))?;
        let meta = IndexMeta { format: INDEX_FORMAT.into(), version: INDEX_VERSION, weights: self.weights };
        let mut meta_json = serde_json::to_string_pretty(&meta).expect("meta serializes");
        meta_json.push('\n');
        write_atomic(&dir.join("index.json"), meta_json.as_bytes()).map_err(|e| io(&e))?;

        let mut lines = String::new();
        for r in &self.resources {
            lines.push_str(&serde_json::to_string(r).expect("resource serializes"));
            lines.push('\n');
        }
        write_atomic(&dir.join("resources.jsonl"), lines.as_bytes()).map_err(|e| io(&e))?;

        let mut counts = serde_json::to_string_pretty(&self.counts).expect("counts serialize");
        counts.push('\n');
        write_atomic(&dir.join("counts.json"), counts.as_bytes()).map_err(|e| io(&e))?;
        Ok(())
    }

    /// Rebuilds the index from a saved directory and checks the stored counts.
    pub fn load(dir: &Path, ontology: &Ontology) -> Result<Self, IndexError> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path)
                .map_err(|e| IndexError::Io { path: path.display().to_string(), message: e.to_string() })
        };
        let meta: IndexMeta = serde_json::from_str(&read("index.json")?)
            .map_err(|e| IndexError::Parse { line: 0, message: format!("index.json: {e}") })?;
        if meta.format != INDEX_FORMAT || meta.version != INDEX_VERSION {
            return Err(IndexError::Corrupt(format!("unsupported index {} v{}", meta.format, meta.version)));
        }
        let resources = parse_resources(&read("resources.jsonl")?)?;
        let counts: BTreeMap<TermUri, usize> = serde_json::from_str(&read("counts.json")?)
            .map_err(|e| IndexError::Parse { line: 0, message: format!("counts.json: {e}") })?;
        let index = ResourceIndex::build(resources, ontology, meta.weights)?;
        if index.counts != counts {
            return Err(IndexError::Corrupt("stored counts differ from the rebuilt ones".into()));
        }
        Ok(index)
    }
}

const INDEX_FORMAT: &str = "topictrap-index";
const INDEX_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexMeta {
    format: String,
    version: u32,
    weights: SearchWeights,
}

pub fn build_index(resources: Vec<Resource>, ontology: &Ontology) -> Result<ResourceIndex, IndexError> {
    ResourceIndex::build(resources, ontology, SearchWeights::default())
}

/// Parses a resources file, one JSON object per line.
pub fn parse_resources(text: &str) -> Result<Vec<Resource>, IndexError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| IndexError::Parse { line: i + 1, message: e.to_string() })
        })
        .collect()
}

pub fn load_resources(path: &Path) -> Result<Vec<Resource>, IndexError> {
    let text = fs::read_to_string(path)
        .map_err(|e| IndexError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_resources(&text)
}
