//! Typeahead over every label of every term.
//!
//! Labels are folded (lowercase, no diacritics) and split into tokens. A
//! query matches a label when each query token is a prefix of some token of
//! that label. Terms whose expanded count is zero are left out, so every
//! completion leads to a non-empty result page.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::write_atomic;
use crate::ontology::{Ontology, TermKind, TermUri};
use crate::text::fold_tokens;

pub const DEFAULT_LIMIT: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcEntry {
    pub uri: TermUri,
    pub kind: TermKind,
    pub label: String,
    pub label_lang: String,
    pub preferred: bool,
    pub count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcIndex {
    entries: Vec<AcEntry>,
    /// Folded label token → entries carrying it.
    #[serde(skip)]
    tokens: BTreeMap<String, BTreeSet<usize>>,
}

impl AcIndex {
    /// One entry per label of every term with a non-zero count; with
    /// `include_zero`, terms without results are kept as well.
    pub fn build(ontology: &Ontology, counts: &BTreeMap<TermUri, usize>, include_zero: bool) -> Self {
        let mut entries = Vec::new();
        for node in ontology.nodes() {
            let count = counts.get(&node.uri).copied().unwrap_or(0);
            if count == 0 && !include_zero {
                continue;
            }
            for label in &node.labels {
                entries.push(AcEntry {
                    uri: node.uri.clone(),
                    kind: node.kind,
                    label: label.text.clone(),
                    label_lang: label.lang.clone(),
                    preferred: label.preferred,
                    count,
                });
            }
        }
        Self::from_entries(entries)
    }

    fn from_entries(mut entries: Vec<AcEntry>) -> Self {
        entries.sort_by(|a, b| (&a.uri, &a.label_lang, &a.label).cmp(&(&b.uri, &b.label_lang, &b.label)));
        entries.dedup();
        let mut tokens: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        for (i, entry) in entries.iter().enumerate() {
            for token in fold_tokens(&entry.label) {
                tokens.entry(token).or_default().insert(i);
            }
        }
        AcIndex { entries, tokens }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[AcEntry] {
        &self.entries
    }

    fn prefix_matches(&self, prefix: &str) -> BTreeSet<usize> {
        self.tokens
            .range(prefix.to_string()..)
            .take_while(|(token, _)| token.starts_with(prefix))
            .flat_map(|(_, ids)| ids.iter().copied())
            .collect()
    }

    /// Completions for `query`, at most one per term. Labels in `lang` come
    /// first, then terms with more results, then alphabetical order.
    pub fn complete(&self, query: &str, lang: &str, limit: usize) -> Vec<AcEntry> {
        let query_tokens = fold_tokens(query);
        let Some((first, rest)) = query_tokens.split_first() else {
            return Vec::new();
        };
        let mut matched = self.prefix_matches(first);
        for token in rest {
            let next = self.prefix_matches(token);
            matched.retain(|i| next.contains(i));
        }

        // best label per term
        let rank = |e: &AcEntry| (e.label_lang != lang, !e.preferred, e.label.clone());
        let mut best: BTreeMap<&TermUri, &AcEntry> = BTreeMap::new();
        for entry in matched.into_iter().map(|i| &self.entries[i]) {
            match best.get(&entry.uri) {
                Some(current) if rank(current) <= rank(entry) => {}
                _ => {
                    best.insert(&entry.uri, entry);
                }
            }
        }
        let mut out: Vec<AcEntry> = best.into_values().cloned().collect();
        out.sort_by(|a, b| {
            (a.label_lang != lang)
                .cmp(&(b.label_lang != lang))
                .then(b.count.cmp(&a.count))
                .then(a.label.cmp(&b.label))
                .then(a.uri.cmp(&b.uri))
        });
        out.truncate(limit);
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("autocomplete index serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let stored: AcIndex = serde_json::from_str(text)?;
        Ok(Self::from_entries(stored.entries))
    }

    pub fn save(&self, path: &Path) -> Result<(), String> {
        write_atomic(path, self.to_json().as_bytes()).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}
