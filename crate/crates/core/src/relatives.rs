//! The graph of related terms.
//!
//! Edges come from three sources merged with precedence: manually authored
//! edges, structural edges derived from the ontology, and textual edges from
//! the LSA of definitions. A manual edge suppresses every other edge on the
//! same pair; structural and textual edges coexist.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::lsa::{self, DroppedDoc, LsaError};
use crate::ontology::{Ontology, TermKind, TermUri};

/// Kind of a related edge. Hierarchy kinds are relative to the edge's `a`
/// endpoint: `PolicyParent` means `b` is a parent of `a`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationKind {
    Manual,
    PolicyParent,
    PolicyChild,
    PolicyIngredientTopic,
    PolicyIngredientProcess,
    PolicyLevelAdjacent,
    Lsa(String),
}

/// Provenance classes in precedence order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Manual,
    Policy,
    Lsa,
}

impl RelationKind {
    pub fn provenance(&self) -> Provenance {
        match self {
            RelationKind::Manual => Provenance::Manual,
            RelationKind::Lsa(_) => Provenance::Lsa,
            _ => Provenance::Policy,
        }
    }

    /// The same relation seen from the other endpoint.
    pub fn reversed(&self) -> RelationKind {
        match self {
            RelationKind::PolicyParent => RelationKind::PolicyChild,
            RelationKind::PolicyChild => RelationKind::PolicyParent,
            other => other.clone(),
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationKind::Manual => f.write_str("manual"),
            RelationKind::PolicyParent => f.write_str("policy_parent"),
            RelationKind::PolicyChild => f.write_str("policy_child"),
            RelationKind::PolicyIngredientTopic => f.write_str("policy_ingredient_topic"),
            RelationKind::PolicyIngredientProcess => f.write_str("policy_ingredient_process"),
            RelationKind::PolicyLevelAdjacent => f.write_str("policy_level_adjacent"),
            RelationKind::Lsa(lang) => write!(f, "lsa:{lang}"),
        }
    }
}

impl FromStr for RelationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "manual" => RelationKind::Manual,
            "policy_parent" => RelationKind::PolicyParent,
            "policy_child" => RelationKind::PolicyChild,
            "policy_ingredient_topic" => RelationKind::PolicyIngredientTopic,
            "policy_ingredient_process" => RelationKind::PolicyIngredientProcess,
            "policy_level_adjacent" => RelationKind::PolicyLevelAdjacent,
            other => match other.strip_prefix("lsa:") {
                Some(lang) if crate::ontology::is_lang_code(lang) => RelationKind::Lsa(lang.to_string()),
                _ => return Err(format!("unknown relation kind `{other}`")),
            },
        })
    }
}

impl Serialize for RelationKind {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RelationKind {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RelativesError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("similarity {value} of `{a}`-`{b}` is outside [0, 1]")]
    Range { a: TermUri, b: TermUri, value: f64 },
    #[error("self loop on `{0}`")]
    SelfLoop(TermUri),
    #[error("line {line}: unknown term `{uri}`")]
    DanglingReference { line: usize, uri: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// An undirected related edge, stored with `a < b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelatedEdge {
    a: TermUri,
    b: TermUri,
    kind: RelationKind,
    similarity: f64,
}

impl RelatedEdge {
    /// Builds an edge from `from` to `to`; the kind is read from `from`'s side.
    pub fn new(from: TermUri, to: TermUri, similarity: f64, kind: RelationKind) -> Result<Self, RelativesError> {
        if from == to {
            return Err(RelativesError::SelfLoop(from));
        }
        if !(0.0..=1.0).contains(&similarity) {
            return Err(RelativesError::Range { a: from, b: to, value: similarity });
        }
        Ok(if from < to {
            RelatedEdge { a: from, b: to, kind, similarity }
        } else {
            RelatedEdge { a: to, b: from, kind: kind.reversed(), similarity }
        })
    }

    pub fn a(&self) -> &TermUri {
        &self.a
    }

    pub fn b(&self) -> &TermUri {
        &self.b
    }

    pub fn kind(&self) -> &RelationKind {
        &self.kind
    }

    pub fn similarity(&self) -> f64 {
        self.similarity
    }

    pub fn touches(&self, uri: &str) -> bool {
        self.a.as_str() == uri || self.b.as_str() == uri
    }

    /// The endpoint opposite to `uri`.
    pub fn other(&self, uri: &str) -> &TermUri {
        if self.a.as_str() == uri {
            &self.b
        } else {
            &self.a
        }
    }

    /// Kind as seen from `uri`.
    pub fn kind_from(&self, uri: &str) -> RelationKind {
        if self.a.as_str() == uri {
            self.kind.clone()
        } else {
            self.kind.reversed()
        }
    }
}

impl<'de> Deserialize<'de> for RelatedEdge {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Record {
            a: TermUri,
            b: TermUri,
            kind: RelationKind,
            similarity: f64,
        }
        let r = Record::deserialize(deserializer)?;
        RelatedEdge::new(r.a, r.b, r.similarity, r.kind).map_err(serde::de::Error::custom)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManualRecord {
    a: String,
    b: String,
    similarity: f64,
}

/// Parses manual edges, one `{"a","b","similarity"}` object per line.
pub fn parse_manual_edges(text: &str, ontology: &Ontology) -> Result<Vec<RelatedEdge>, RelativesError> {
    let mut edges = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: ManualRecord =
            serde_json::from_str(line).map_err(|e| RelativesError::Parse { line: line_no, message: e.to_string() })?;
        let mut uris = Vec::with_capacity(2);
        for uri in [record.a, record.b] {
            if !ontology.contains(&uri) {
                return Err(RelativesError::DanglingReference { line: line_no, uri });
            }
            uris.push(TermUri::new(uri).expect("ontology uris are valid"));
        }
        let b = uris.pop().unwrap();
        let a = uris.pop().unwrap();
        edges.push(RelatedEdge::new(a, b, record.similarity, RelationKind::Manual)?);
    }
    Ok(edges)
}

pub fn load_manual_edges(path: &Path, ontology: &Ontology) -> Result<Vec<RelatedEdge>, RelativesError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RelativesError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_manual_edges(&text, ontology)
}

/// Similarities assigned to structural edges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySimilarities {
    pub parent: f64,
    pub ingredient: f64,
    pub level_adjacent: f64,
}

impl Default for PolicySimilarities {
    fn default() -> Self {
        PolicySimilarities { parent: 0.9, ingredient: 0.85, level_adjacent: 0.7 }
    }
}

/// Structural edges: one per child/parent pair, one per competency
/// ingredient (process and topics), one per pair of levels of the same
/// region whose age ranges overlap or touch.
pub fn policy_edges(ontology: &Ontology, sims: &PolicySimilarities) -> Result<Vec<RelatedEdge>, RelativesError> {
    let mut edges = Vec::new();
    let mut levels = Vec::new();
    for node in ontology.nodes() {
        for parent in &node.parents {
            edges.push(RelatedEdge::new(node.uri.clone(), parent.clone(), sims.parent, RelationKind::PolicyParent)?);
        }
        if let Some(process) = &node.process {
            edges.push(RelatedEdge::new(
                node.uri.clone(),
                process.clone(),
                sims.ingredient,
                RelationKind::PolicyIngredientProcess,
            )?);
        }
        for topic in &node.ingredient_topics {
            edges.push(RelatedEdge::new(
                node.uri.clone(),
                topic.clone(),
                sims.ingredient,
                RelationKind::PolicyIngredientTopic,
            )?);
        }
        if node.kind == TermKind::EducationalLevel {
            if let Some(range) = node.age_range {
                levels.push((node, range));
            }
        }
    }
    for (i, (x, (x_lo, x_hi))) in levels.iter().enumerate() {
        for (y, (y_lo, y_hi)) in &levels[i + 1..] {
            let touching = *y_lo <= x_hi.saturating_add(1) && *x_lo <= y_hi.saturating_add(1);
            if x.region == y.region && touching {
                edges.push(RelatedEdge::new(
                    x.uri.clone(),
                    y.uri.clone(),
                    sims.level_adjacent,
                    RelationKind::PolicyLevelAdjacent,
                )?);
            }
        }
    }
    edges.sort_by(canonical_order);
    edges.dedup_by(|x, y| x.a == y.a && x.b == y.b && x.kind == y.kind);
    Ok(edges)
}

fn canonical_order(x: &RelatedEdge, y: &RelatedEdge) -> std::cmp::Ordering {
    (&x.a, &x.b, &x.kind).cmp(&(&y.a, &y.b, &y.kind)).then(y.similarity.total_cmp(&x.similarity))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LanguageReport {
    pub lang: String,
    pub documents: usize,
    pub rank: usize,
    pub edges: usize,
    pub dropped: Vec<DroppedDoc>,
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LsaReport {
    pub languages: Vec<LanguageReport>,
}

/// Textual edges: per language, pairs of definitions whose reduced-space
/// similarity is positive and reaches `threshold`. Languages that cannot be
/// analysed are reported and skipped.
pub fn lsa_edges(corpus: &Corpus, threshold: f64, k_max: usize) -> Result<(Vec<RelatedEdge>, LsaReport), LsaError> {
    let mut edges = Vec::new();
    let mut report = LsaReport::default();
    for (lang, docs) in corpus.iter() {
        let mut entry = LanguageReport { lang: lang.to_string(), documents: docs.len(), ..Default::default() };
        let matrix = match lsa::build_matrix(docs, lang) {
            Ok(m) => m,
            Err(e @ LsaError::CorpusTooSmall { .. }) => {
                entry.skipped = Some(e.to_string());
                report.languages.push(entry);
                continue;
            }
            Err(e) => return Err(e),
        };
        entry.dropped = matrix.dropped().to_vec();
        let space = lsa::reduce(&matrix, k_max)?;
        entry.rank = space.rank();
        for pair in lsa::all_pairs(&space, threshold) {
            if pair.similarity > 0.0 {
                let edge = RelatedEdge::new(pair.a, pair.b, pair.similarity, RelationKind::Lsa(lang.to_string()))
                    .expect("pairs are distinct and clamped to [0, 1]");
                edges.push(edge);
                entry.edges += 1;
            }
        }
        report.languages.push(entry);
    }
    edges.sort_by(canonical_order);
    Ok((edges, report))
}

/// A neighbor of a term with every surviving edge of the pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Neighbor<'g> {
    pub uri: &'g TermUri,
    pub edges: &'g [RelatedEdge],
}

impl Neighbor<'_> {
    /// Maximum similarity across the pair's surviving edges.
    pub fn effective_similarity(&self) -> f64 {
        self.edges.iter().map(|e| e.similarity).fold(0.0, f64::max)
    }
}

const GRAPH_FORMAT: &str = "topictrap-relatives";
const GRAPH_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphHeader {
    format: String,
    version: u32,
    edges: usize,
}

/// Merged relatives graph; immutable once built.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RelativesGraph {
    pairs: BTreeMap<(TermUri, TermUri), Vec<RelatedEdge>>,
    adjacency: BTreeMap<TermUri, BTreeSet<TermUri>>,
}

/// Merges the three edge sources. Within a pair, one edge per kind is kept
/// (the most similar); a manual edge removes all non-manual edges.
pub fn merge(
    manual: &[RelatedEdge],
    policy: &[RelatedEdge],
    lsa: &[RelatedEdge],
) -> Result<RelativesGraph, RelativesError> {
    RelativesGraph::from_edges(manual.iter().chain(policy).chain(lsa).cloned())
}

impl RelativesGraph {
    pub fn from_edges(edges: impl IntoIterator<Item = RelatedEdge>) -> Result<Self, RelativesError> {
        let mut grouped: BTreeMap<(TermUri, TermUri), BTreeMap<RelationKind, RelatedEdge>> = BTreeMap::new();
        for edge in edges {
            // re-validate: edges may have been built by hand
            let edge = RelatedEdge::new(edge.a, edge.b, edge.similarity, edge.kind)?;
            let slot = grouped.entry((edge.a.clone(), edge.b.clone())).or_default();
            match slot.get(&edge.kind) {
                Some(existing) if existing.similarity >= edge.similarity => {}
                _ => {
                    slot.insert(edge.kind.clone(), edge);
                }
            }
        }

        let mut graph = RelativesGraph::default();
        for (pair, mut by_kind) in grouped {
            if let Some(manual) = by_kind.remove(&RelationKind::Manual) {
                by_kind.clear();
                by_kind.insert(RelationKind::Manual, manual);
            }
            graph.adjacency.entry(pair.0.clone()).or_default().insert(pair.1.clone());
            graph.adjacency.entry(pair.1.clone()).or_default().insert(pair.0.clone());
            graph.pairs.insert(pair, by_kind.into_values().collect());
        }
        Ok(graph)
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of related pairs.
    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// All surviving edges in canonical order (pair, then kind).
    pub fn edges(&self) -> impl Iterator<Item = &RelatedEdge> {
        self.pairs.values().flatten()
    }

    pub fn edges_between(&self, x: &str, y: &str) -> &[RelatedEdge] {
        match (TermUri::new(x), TermUri::new(y)) {
            (Ok(x), Ok(y)) => self.pair(&x, &y),
            _ => &[],
        }
    }

    fn pair(&self, x: &TermUri, y: &TermUri) -> &[RelatedEdge] {
        let key = if x <= y { (x.clone(), y.clone()) } else { (y.clone(), x.clone()) };
        self.pairs.get(&key).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Neighbors of `uri` in uri order.
    pub fn neighbors(&self, uri: &str) -> Vec<Neighbor<'_>> {
        let Some((center, others)) = self.adjacency.get_key_value(uri) else {
            return Vec::new();
        };
        others.iter().map(|other| Neighbor { uri: other, edges: self.pair(center, other) }).collect()
    }

    pub fn effective_similarity(&self, x: &str, y: &str) -> Option<f64> {
        let edges = self.edges_between(x, y);
        (!edges.is_empty()).then(|| edges.iter().map(|e| e.similarity).fold(0.0, f64::max))
    }

    /// Splits surviving edges back into (manual, policy, lsa) lists.
    pub fn partition(&self) -> (Vec<RelatedEdge>, Vec<RelatedEdge>, Vec<RelatedEdge>) {
        let (mut manual, mut policy, mut lsa) = (Vec::new(), Vec::new(), Vec::new());
        for edge in self.edges() {
            match edge.kind.provenance() {
                Provenance::Manual => manual.push(edge.clone()),
                Provenance::Policy => policy.push(edge.clone()),
                Provenance::Lsa => lsa.push(edge.clone()),
            }
        }
        (manual, policy, lsa)
    }

    /// Header line, then one edge per line in canonical order.
    pub fn to_text(&self) -> String {
        let header =
            GraphHeader { format: GRAPH_FORMAT.to_string(), version: GRAPH_VERSION, edges: self.edges().count() };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for edge in self.edges() {
            out.push_str(&serde_json::to_string(edge).expect("edge serializes"));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, RelativesError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) =
            lines.next().ok_or(RelativesError::Parse { line: 1, message: "missing header".to_string() })?;
        let header: GraphHeader = serde_json::from_str(first)
            .map_err(|e| RelativesError::Parse { line: 1, message: format!("bad header: {e}") })?;
        if header.format != GRAPH_FORMAT || header.version != GRAPH_VERSION {
            return Err(RelativesError::Parse {
                line: 1,
                message: format!("unsupported graph format {} v{}", header.format, header.version),
            });
        }
        let mut edges = Vec::with_capacity(header.edges);
        for (idx, line) in lines {
            let edge: RelatedEdge = serde_json::from_str(line)
                .map_err(|e| RelativesError::Parse { line: idx + 1, message: e.to_string() })?;
            edges.push(edge);
        }
        if edges.len() != header.edges {
            return Err(RelativesError::Parse {
                line: 1,
                message: format!("header announces {} edges, found {}", header.edges, edges.len()),
            });
        }
        Self::from_edges(edges)
    }

    pub fn save(&self, path: &Path) -> Result<(), RelativesError> {
        crate::corpus::write_atomic(path, self.to_text().as_bytes())
            .map_err(|e| RelativesError::Io { path: path.display().to_string(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, RelativesError> {
        let text = fs::read_to_string(path)
            .map_err(|e| RelativesError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }
}
