//! Typed ontology of topics, competencies, competency processes and
//! educational levels.
//!
//! The interchange format is one JSON object per line:
//!
//! ```text
//! {"uri":"ellipse","kind":"topic","labels":[{"lang":"en","text":"ellipse","preferred":true}],
//!  "parents":["conic_section"],"process":null,"ingredient_topics":[],"region":null,
//!  "age_min":null,"age_max":null,"definitions":[{"lang":"en","url":"https://en.wikipedia.org/wiki/Ellipse"}]}
//! ```
//!
//! Validation is strict: a malformed record, a dangling reference or a cycle in
//! the topic hierarchy rejects the whole file.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

/// Identifier of an ontology node.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TermUri(String);

impl TermUri {
    pub fn new(value: impl Into<String>) -> Result<Self, String> {
        let value = value.into();
        if value.is_empty() {
            return Err("term uri is empty".to_string());
        }
        if value.chars().any(char::is_whitespace) {
            return Err(format!("term uri `{value}` contains whitespace"));
        }
        Ok(TermUri(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for TermUri {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        TermUri::new(value)
    }
}

impl From<TermUri> for String {
    fn from(uri: TermUri) -> Self {
        uri.0
    }
}

impl Borrow<str> for TermUri {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for TermUri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TermUri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TermKind {
    #[serde(rename = "topic")]
    Topic,
    #[serde(rename = "competency")]
    Competency,
    #[serde(rename = "process")]
    CompetencyProcess,
    #[serde(rename = "level")]
    EducationalLevel,
}

impl TermKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TermKind::Topic => "topic",
            TermKind::Competency => "competency",
            TermKind::CompetencyProcess => "process",
            TermKind::EducationalLevel => "level",
        }
    }
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Label {
    pub lang: String,
    pub text: String,
    #[serde(default)]
    pub preferred: bool,
}

/// Where the definition text of a term lives, for one language.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DefinitionRef {
    pub uri: TermUri,
    pub lang: String,
    pub url: String,
}

impl DefinitionRef {
    /// Checks that the url parses and, for Wikipedia hosts, that the language
    /// edition matches `lang`.
    pub fn validate(&self) -> Result<Url, String> {
        if !is_lang_code(&self.lang) {
            return Err(format!("invalid language code `{}`", self.lang));
        }
        let url = Url::parse(&self.url).map_err(|e| format!("invalid url `{}`: {e}", self.url))?;
        if let Some(host) = url.host_str() {
            if let Some(edition) = wikipedia_edition(host) {
                if edition != self.lang {
                    return Err(format!(
                        "url `{}` points to the `{edition}` Wikipedia but the definition is tagged `{}`",
                        self.url, self.lang
                    ));
                }
            }
        }
        Ok(url)
    }
}

fn wikipedia_edition(host: &str) -> Option<&str> {
    let rest = host.strip_suffix(".wikipedia.org")?;
    let edition = rest.split('.').next()?;
    Some(edition)
}

pub(crate) fn is_lang_code(lang: &str) -> bool {
    lang.len() == 2 && lang.bytes().all(|b| b.is_ascii_lowercase())
}

#[derive(Clone, Debug, PartialEq)]
pub struct OntologyNode {
    pub uri: TermUri,
    pub kind: TermKind,
    pub labels: Vec<Label>,
    /// Parent topics; only topics have parents.
    pub parents: Vec<TermUri>,
    /// Competency process; competencies only.
    pub process: Option<TermUri>,
    pub ingredient_topics: Vec<TermUri>,
    pub region: Option<String>,
    /// Inclusive `(min, max)` age range; educational levels only.
    pub age_range: Option<(u32, u32)>,
    pub definition_refs: Vec<DefinitionRef>,
}

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("cannot read ontology {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dangling reference to `{uri}` from `{referenced_by}`")]
    DanglingReference { uri: TermUri, referenced_by: TermUri },
    #[error("`{referenced_by}` references `{uri}` as a {expected} but it is a {found}")]
    WrongReferenceKind { uri: TermUri, referenced_by: TermUri, expected: TermKind, found: TermKind },
    #[error("topic hierarchy contains a cycle: {}", format_cycle(.0))]
    HierarchyCycle(Vec<TermUri>),
}

fn format_cycle(cycle: &[TermUri]) -> String {
    cycle.iter().map(TermUri::as_str).collect::<Vec<_>>().join(" -> ")
}

/// Errors of term lookups on a loaded ontology.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("unknown term `{0}`")]
    UnknownTerm(String),
    #[error("`{uri}` is a {found}, expected a {expected}")]
    KindMismatch { uri: TermUri, expected: TermKind, found: TermKind },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    uri: String,
    kind: TermKind,
    #[serde(default)]
    labels: Vec<Label>,
    #[serde(default)]
    parents: Vec<String>,
    #[serde(default)]
    process: Option<String>,
    #[serde(default)]
    ingredient_topics: Vec<String>,
    #[serde(default)]
    region: Option<String>,
    #[serde(default)]
    age_min: Option<u32>,
    #[serde(default)]
    age_max: Option<u32>,
    #[serde(default)]
    definitions: Vec<DefinitionRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DefinitionRecord {
    lang: String,
    url: String,
}

impl NodeRecord {
    fn into_node(self) -> Result<OntologyNode, String> {
        let uri = TermUri::new(self.uri)?;
        let kind = self.kind;

        let mut preferred_langs = BTreeSet::new();
        for label in &self.labels {
            if !is_lang_code(&label.lang) {
                return Err(format!("invalid label language `{}`", label.lang));
            }
            if label.text.trim().is_empty() {
                return Err("empty label text".to_string());
            }
            if label.preferred && !preferred_langs.insert(label.lang.clone()) {
                return Err(format!("more than one preferred `{}` label", label.lang));
            }
        }

        let mut parents = Vec::new();
        for p in self.parents {
            let p = TermUri::new(p)?;
            if !parents.contains(&p) {
                parents.push(p);
            }
        }
        if !parents.is_empty() && kind != TermKind::Topic {
            return Err(format!("a {kind} cannot have parents"));
        }

        let process = self.process.map(TermUri::new).transpose()?;
        let ingredient_topics = self.ingredient_topics.into_iter().map(TermUri::new).collect::<Result<Vec<_>, _>>()?;
        if kind == TermKind::Competency {
            if process.is_none() {
                return Err("a competency needs a process".to_string());
            }
            if ingredient_topics.is_empty() {
                return Err("a competency needs at least one ingredient topic".to_string());
            }
        } else if process.is_some() || !ingredient_topics.is_empty() {
            return Err(format!("a {kind} cannot have a process or ingredients"));
        }

        let age_range = match (self.age_min, self.age_max) {
            (None, None) => None,
            (Some(lo), Some(hi)) if lo <= hi => Some((lo, hi)),
            (Some(lo), Some(hi)) => return Err(format!("age_min {lo} exceeds age_max {hi}")),
            _ => return Err("age_min and age_max must be given together".to_string()),
        };
        if kind != TermKind::EducationalLevel && (age_range.is_some() || self.region.is_some()) {
            return Err(format!("a {kind} cannot have a region or an age range"));
        }

        let mut definition_refs: Vec<DefinitionRef> = Vec::new();
        for def in self.definitions {
            let def = DefinitionRef { uri: uri.clone(), lang: def.lang, url: def.url };
            def.validate()?;
            if definition_refs.iter().any(|d| d.lang == def.lang) {
                return Err(format!("more than one `{}` definition", def.lang));
            }
            definition_refs.push(def);
        }

        Ok(OntologyNode {
            uri,
            kind,
            labels: self.labels,
            parents,
            process,
            ingredient_topics,
            region: self.region,
            age_range,
            definition_refs,
        })
    }
}

/// A validated, immutable ontology.
#[derive(Clone, Debug, Default)]
pub struct Ontology {
    nodes: BTreeMap<TermUri, OntologyNode>,
    children: BTreeMap<TermUri, BTreeSet<TermUri>>,
}

impl Ontology {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, OntologyError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|source| OntologyError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Parses JSON-lines text. Blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self, OntologyError> {
        let mut nodes = Vec::new();
        let mut seen = BTreeSet::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let record: NodeRecord = serde_json::from_str(line)
                .map_err(|e| OntologyError::Parse { line: line_no, message: e.to_string() })?;
            let node = record.into_node().map_err(|message| OntologyError::Parse { line: line_no, message })?;
            if !seen.insert(node.uri.clone()) {
                return Err(OntologyError::Parse { line: line_no, message: format!("duplicate uri `{}`", node.uri) });
            }
            nodes.push(node);
        }
        Self::from_nodes(nodes)
    }

    /// Builds an ontology from already-parsed nodes, checking every
    /// cross-reference and the acyclicity of the topic hierarchy.
    pub fn from_nodes(nodes: Vec<OntologyNode>) -> Result<Self, OntologyError> {
        let mut map = BTreeMap::new();
        for node in nodes {
            if map.contains_key(&node.uri) {
                return Err(OntologyError::Parse { line: 0, message: format!("duplicate uri `{}`", node.uri) });
            }
            map.insert(node.uri.clone(), node);
        }

        let check = |uri: &TermUri, by: &TermUri, expected: TermKind| -> Result<(), OntologyError> {
            match map.get(uri) {
                None => Err(OntologyError::DanglingReference { uri: uri.clone(), referenced_by: by.clone() }),
                Some(target) if target.kind != expected => Err(OntologyError::WrongReferenceKind {
                    uri: uri.clone(),
                    referenced_by: by.clone(),
                    expected,
                    found: target.kind,
                }),
                Some(_) => Ok(()),
            }
        };
        for node in map.values() {
            for parent in &node.parents {
                check(parent, &node.uri, TermKind::Topic)?;
            }
            if let Some(process) = &node.process {
                check(process, &node.uri, TermKind::CompetencyProcess)?;
            }
            for topic in &node.ingredient_topics {
                check(topic, &node.uri, TermKind::Topic)?;
            }
        }

        let mut children: BTreeMap<TermUri, BTreeSet<TermUri>> = BTreeMap::new();
        for node in map.values() {
            for parent in &node.parents {
                children.entry(parent.clone()).or_default().insert(node.uri.clone());
            }
        }

        let ontology = Ontology { nodes: map, children };
        if let Some(cycle) = ontology.find_cycle() {
            return Err(OntologyError::HierarchyCycle(cycle));
        }
        Ok(ontology)
    }

    fn find_cycle(&self) -> Option<Vec<TermUri>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Unseen,
            Active,
            Done,
        }
        let mut marks: BTreeMap<&TermUri, Mark> = self.nodes.keys().map(|k| (k, Mark::Unseen)).collect();

        for root in self.nodes.keys() {
            if marks[root] != Mark::Unseen {
                continue;
            }
            // Iterative DFS over parent links; `path` holds the active chain.
            let mut path: Vec<&TermUri> = vec![root];
            let mut cursor: Vec<usize> = vec![0];
            marks.insert(root, Mark::Active);
            while let Some(&node) = path.last() {
                let i = cursor.last_mut().unwrap();
                let parents = &self.nodes[node].parents;
                if *i < parents.len() {
                    let next = &parents[*i];
                    *i += 1;
                    match marks[next] {
                        Mark::Active => {
                            let start = path.iter().position(|u| *u == next).unwrap();
                            let mut cycle: Vec<TermUri> = path[start..].iter().map(|u| (*u).clone()).collect();
                            cycle.push(next.clone());
                            return Some(cycle);
                        }
                        Mark::Unseen => {
                            marks.insert(next, Mark::Active);
                            path.push(next);
                            cursor.push(0);
                        }
                        Mark::Done => {}
                    }
                } else {
                    marks.insert(node, Mark::Done);
                    path.pop();
                    cursor.pop();
                }
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, uri: &str) -> Option<&OntologyNode> {
        self.nodes.get(uri)
    }

    pub fn node(&self, uri: &str) -> Result<&OntologyNode, TermError> {
        self.nodes.get(uri).ok_or_else(|| TermError::UnknownTerm(uri.to_string()))
    }

    pub fn contains(&self, uri: &str) -> bool {
        self.nodes.contains_key(uri)
    }

    /// Nodes in uri order.
    pub fn nodes(&self) -> impl Iterator<Item = &OntologyNode> {
        self.nodes.values()
    }

    fn topic(&self, uri: &str) -> Result<&OntologyNode, TermError> {
        let node = self.node(uri)?;
        if node.kind != TermKind::Topic {
            return Err(TermError::KindMismatch { uri: node.uri.clone(), expected: TermKind::Topic, found: node.kind });
        }
        Ok(node)
    }

    /// Direct children of a topic.
    pub fn children_of(&self, uri: &str) -> Result<BTreeSet<TermUri>, TermError> {
        self.topic(uri)?;
        Ok(self.children.get(uri).cloned().unwrap_or_default())
    }

    /// Direct parents of a topic.
    pub fn parents_of(&self, uri: &str) -> Result<BTreeSet<TermUri>, TermError> {
        Ok(self.topic(uri)?.parents.iter().cloned().collect())
    }

    /// All strictly more specific topics below `uri`.
    pub fn descendants(&self, uri: &str) -> Result<BTreeSet<TermUri>, TermError> {
        self.topic(uri)?;
        Ok(self.closure(uri, |u| self.children.get(u).into_iter().flatten().collect()))
    }

    /// All strictly more general topics above `uri`.
    pub fn ancestors(&self, uri: &str) -> Result<BTreeSet<TermUri>, TermError> {
        self.topic(uri)?;
        Ok(self.closure(uri, |u| self.nodes[u].parents.iter().collect()))
    }

    fn closure<'a, F>(&'a self, start: &str, step: F) -> BTreeSet<TermUri>
    where
        F: Fn(&str) -> Vec<&'a TermUri>,
    {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<&TermUri> = step(start).into();
        while let Some(next) = queue.pop_front() {
            if seen.insert(next.clone()) {
                queue.extend(step(next.as_str()));
            }
        }
        seen
    }

    /// The process and ingredient topics of a competency, in stored order.
    pub fn ingredients_of(&self, uri: &str) -> Result<(&TermUri, &[TermUri]), TermError> {
        let node = self.node(uri)?;
        match (&node.kind, &node.process) {
            (TermKind::Competency, Some(process)) => Ok((process, &node.ingredient_topics)),
            _ => {
                Err(TermError::KindMismatch { uri: node.uri.clone(), expected: TermKind::Competency, found: node.kind })
            }
        }
    }

    /// Labels in `lang`, preferred first. Falls back to every label of the
    /// node when none exists in `lang`.
    pub fn labels_of(&self, uri: &str, lang: &str) -> Result<Vec<&Label>, TermError> {
        let node = self.node(uri)?;
        let mut in_lang: Vec<&Label> = node.labels.iter().filter(|l| l.lang == lang).collect();
        if in_lang.is_empty() {
            in_lang = node.labels.iter().collect();
        }
        // stable: keeps file order inside each group
        in_lang.sort_by_key(|l| !l.preferred);
        Ok(in_lang)
    }

    /// Display label for `uri` in `lang`, or the uri itself for unlabeled nodes.
    pub fn display_label(&self, uri: &str, lang: &str) -> Result<String, TermError> {
        Ok(self.labels_of(uri, lang)?.first().map(|l| l.text.clone()).unwrap_or_else(|| uri.to_string()))
    }

    pub fn nodes_of_kind(&self, kind: TermKind) -> Vec<TermUri> {
        self.nodes.values().filter(|n| n.kind == kind).map(|n| n.uri.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn topic(uri: &str, parents: &[&str]) -> String {
        let parents: Vec<String> = parents.iter().map(|p| format!("\"{p}\"")).collect();
        format!(
            r#"{{"uri":"{uri}","kind":"topic","labels":[{{"lang":"en","text":"{uri}","preferred":true}}],"parents":[{}],"process":null,"ingredient_topics":[],"region":null,"age_min":null,"age_max":null,"definitions":[]}}"#,
            parents.join(",")
        )
    }

    fn load(lines: &[String]) -> Result<Ontology, OntologyError> {
        Ontology::parse(&lines.join("\n"))
    }

    fn set(items: &[&str]) -> BTreeSet<TermUri> {
        items.iter().map(|s| TermUri::new(*s).unwrap()).collect()
    }

    #[test]
    fn empty_file_is_empty_ontology() {
        let o = Ontology::parse("").unwrap();
        assert!(o.is_empty());
        assert!(o.nodes_of_kind(TermKind::Topic).is_empty());
    }

    #[test]
    fn dangling_parent_is_rejected() {
        let err = load(&[topic("B", &["A"])]).unwrap_err();
        match err {
            OntologyError::DanglingReference { uri, referenced_by } => {
                assert_eq!(uri.as_str(), "A");
                assert_eq!(referenced_by.as_str(), "B");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn redundant_parent_declaration_loads() {
        let o = load(&[topic("A", &[]), topic("B", &["A"]), topic("C", &["B", "A"])]).unwrap();
        assert_eq!(o.descendants("A").unwrap(), set(&["B", "C"]));
    }

    #[test]
    fn descendants_and_ancestors() {
        let o = load(&[topic("A", &[]), topic("B", &["A"]), topic("C", &["A"]), topic("D", &["B"])]).unwrap();
        assert_eq!(o.descendants("A").unwrap(), set(&["B", "C", "D"]));
        assert!(o.descendants("D").unwrap().is_empty());
        assert!(o.ancestors("A").unwrap().is_empty());
        assert_eq!(o.ancestors("D").unwrap(), set(&["A", "B"]));

        let diamond =
            load(&[topic("A", &[]), topic("B", &["A"]), topic("C", &["A"]), topic("D", &["B", "C"])]).unwrap();
        assert_eq!(diamond.descendants("A").unwrap(), set(&["B", "C", "D"]));
        assert_eq!(diamond.ancestors("D").unwrap(), set(&["A", "B", "C"]));
    }

    #[test]
    fn cycle_is_reported() {
        let err = load(&[topic("A", &["C"]), topic("B", &["A"]), topic("C", &["B"])]).unwrap_err();
        match err {
            OntologyError::HierarchyCycle(cycle) => {
                assert_eq!(cycle.first(), cycle.last());
                assert_eq!(cycle.len(), 4);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(load(&[topic("A", &["A"])]), Err(OntologyError::HierarchyCycle(_))));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Ontology::parse(&format!("{}\n\n{{\"uri\":\"x\"", topic("A", &[]))).unwrap_err();
        assert!(matches!(err, OntologyError::Parse { line: 3, .. }), "{err:?}");

        let unknown = r#"{"uri":"x","kind":"topic","colour":"red"}"#;
        assert!(matches!(Ontology::parse(unknown), Err(OntologyError::Parse { line: 1, .. })));

        let dup = format!("{}\n{}", topic("A", &[]), topic("A", &[]));
        assert!(matches!(Ontology::parse(&dup), Err(OntologyError::Parse { line: 2, .. })));

        let spaced = r#"{"uri":"a b","kind":"topic"}"#;
        assert!(matches!(Ontology::parse(spaced), Err(OntologyError::Parse { line: 1, .. })));
    }

    #[test]
    fn competency_structure_is_enforced() {
        let no_process = r#"{"uri":"c","kind":"competency","ingredient_topics":["t"]}"#;
        assert!(matches!(
            Ontology::parse(&format!("{}\n{no_process}", topic("t", &[]))),
            Err(OntologyError::Parse { line: 2, .. })
        ));
        let wrong_kind = format!(
            "{}\n{}",
            topic("t", &[]),
            r#"{"uri":"c","kind":"competency","process":"t","ingredient_topics":["t"]}"#
        );
        assert!(matches!(Ontology::parse(&wrong_kind), Err(OntologyError::WrongReferenceKind { .. })));
    }

    #[test]
    fn wikipedia_edition_must_match_language() {
        let bad =
            r#"{"uri":"t","kind":"topic","definitions":[{"lang":"fr","url":"https://en.wikipedia.org/wiki/Circle"}]}"#;
        assert!(matches!(Ontology::parse(bad), Err(OntologyError::Parse { line: 1, .. })));
        let ok = r#"{"uri":"t","kind":"topic","definitions":[{"lang":"fr","url":"https://fr.wikipedia.org/wiki/Cercle#D%C3%A9finition"}]}"#;
        let o = Ontology::parse(ok).unwrap();
        assert_eq!(o.get("t").unwrap().definition_refs[0].lang, "fr");
    }

    #[test]
    fn ingredients_keep_order() {
        let text = [
            r#"{"uri":"calc","kind":"process"}"#.to_string(),
            topic("b", &[]),
            topic("a", &[]),
            r#"{"uri":"c","kind":"competency","process":"calc","ingredient_topics":["b","a"]}"#.to_string(),
        ];
        let o = load(&text).unwrap();
        let (process, topics) = o.ingredients_of("c").unwrap();
        assert_eq!(process.as_str(), "calc");
        assert_eq!(topics.iter().map(TermUri::as_str).collect::<Vec<_>>(), vec!["b", "a"]);
        assert!(matches!(o.ingredients_of("a"), Err(TermError::KindMismatch { .. })));
        assert!(matches!(o.descendants("c"), Err(TermError::KindMismatch { .. })));
        assert!(matches!(o.ingredients_of("zz"), Err(TermError::UnknownTerm(_))));
    }

    #[test]
    fn labels_prefer_request_language() {
        let text = r#"{"uri":"circumcircle","kind":"topic","labels":[{"lang":"de","text":"Umkreis","preferred":true},{"lang":"en","text":"circumscribed circle","preferred":false},{"lang":"en","text":"circumcircle","preferred":true},{"lang":"fr","text":"cercle circonscrit","preferred":true}]}
{"uri":"kreis","kind":"topic","labels":[{"lang":"de","text":"Kreis","preferred":true}]}"#;
        let o = Ontology::parse(text).unwrap();
        let en: Vec<&str> = o.labels_of("circumcircle", "en").unwrap().iter().map(|l| l.text.as_str()).collect();
        assert_eq!(en, vec!["circumcircle", "circumscribed circle"]);
        let fallback = o.labels_of("kreis", "en").unwrap();
        assert_eq!(fallback.len(), 1);
        assert_eq!(fallback[0].lang, "de");
        assert!(matches!(o.labels_of("nope", "en"), Err(TermError::UnknownTerm(_))));
    }

    #[test]
    fn nodes_of_kind_sorted() {
        let text = [
            topic("zeta", &[]),
            topic("alpha", &[]),
            topic("mid", &[]),
            r#"{"uri":"grade5","kind":"level","region":"de-BY","age_min":10,"age_max":11}"#.to_string(),
        ];
        let o = load(&text).unwrap();
        let topics: Vec<String> = o.nodes_of_kind(TermKind::Topic).into_iter().map(String::from).collect();
        assert_eq!(topics, vec!["alpha", "mid", "zeta"]);
        assert_eq!(o.nodes_of_kind(TermKind::EducationalLevel).len(), 1);
        assert_eq!(o.get("grade5").unwrap().age_range, Some((10, 11)));
    }
}
