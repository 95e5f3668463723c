//! Query endpoints. The HTTP server and the `query` command both call these
//! functions with the raw parameter list and emit the returned body as is,
//! so the two front ends answer identical queries with identical bytes.

use std::collections::BTreeMap;

use serde::Serialize;
use topictrap_core::index::{SearchError, SearchQuery};
use topictrap_core::ontology::{Label, TermError};
use topictrap_core::relatives::{Provenance, RelationKind};
use topictrap_core::suggest::suggest;
use topictrap_core::text::fold_tokens;
use topictrap_core::{SearchHit, TermKind, TermUri};

use crate::config::Limits;
use crate::error::CliError;
use crate::store::Engine;

/// Request-independent settings.
#[derive(Clone, Debug)]
pub struct ApiSettings {
    pub default_lang: String,
    pub limits: Limits,
}

/// Query parameters after rejecting duplicates.
pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            if map.insert(k.clone(), v).is_some() {
                return Err(CliError::bad_request(format!("parameter `{k}` given more than once")));
            }
        }
        Ok(Params(map))
    }

    fn text(&self, name: &str) -> Option<&str> {
        self.0.get(name).map(String::as_str).filter(|v| !v.trim().is_empty())
    }

    fn required(&self, name: &str) -> Result<&str, CliError> {
        self.text(name).ok_or_else(|| CliError::bad_request(format!("parameter `{name}` is required")))
    }

    fn count(&self, name: &str, default: usize, max: usize) -> Result<usize, CliError> {
        let Some(raw) = self.0.get(name) else { return Ok(default) };
        let value: usize = raw
            .parse()
            .map_err(|_| CliError::bad_request(format!("parameter `{name}` must be a non-negative integer")))?;
        if value > max {
            return Err(CliError::bad_request(format!("parameter `{name}` exceeds {max}")));
        }
        Ok(value)
    }

    fn lang(&self, settings: &ApiSettings) -> Result<String, CliError> {
        let Some(lang) = self.0.get("lang") else { return Ok(settings.default_lang.clone()) };
        if lang.len() != 2 || !lang.bytes().all(|b| b.is_ascii_lowercase()) {
            return Err(CliError::bad_request(format!("`{lang}` is not a two-letter language code")));
        }
        Ok(lang.clone())
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("responses serialize")
}

fn term_error(e: TermError) -> CliError {
    match e {
        TermError::UnknownTerm(uri) => CliError::not_found(format!("unknown term `{uri}`")),
        other => CliError::bad_request(other.to_string()),
    }
}

/// `GET /api/autocomplete?q&lang&limit`
pub fn autocomplete(engine: &Engine, settings: &ApiSettings, params: &Params) -> Result<String, CliError> {
    let q = params.required("q")?;
    if fold_tokens(q).is_empty() {
        return Err(CliError::bad_request("parameter `q` has no letters or digits"));
    }
    let lang = params.lang(settings)?;
    let limit = params.count("limit", settings.limits.autocomplete, settings.limits.max)?;
    Ok(to_json(&engine.autocomplete.complete(q, &lang, limit)))
}

#[derive(Serialize)]
struct SearchBody<'a> {
    total: usize,
    offset: usize,
    limit: usize,
    hits: &'a [SearchHit],
}

/// `GET /api/search?term&words&lang&offset&limit`
pub fn search(engine: &Engine, settings: &ApiSettings, params: &Params) -> Result<String, CliError> {
    let lang = params.lang(settings)?;
    let offset = params.count("offset", 0, usize::MAX)?;
    let limit = params.count("limit", settings.limits.search, settings.limits.max)?;
    let query =
        SearchQuery { term: params.text("term"), words: params.text("words"), lang: &lang, offset, limit: Some(limit) };
    let page = engine.index.search(&engine.ontology, &query).map_err(|e| match e {
        SearchError::Term(t) => term_error(t),
        SearchError::EmptyQuery => CliError::bad_request("give a `term` or searchable `words`"),
    })?;
    Ok(to_json(&SearchBody { total: page.total, offset, limit, hits: &page.hits }))
}

/// `GET /api/suggest?term&lang&limit`
pub fn suggestions(engine: &Engine, settings: &ApiSettings, params: &Params) -> Result<String, CliError> {
    let term = params.required("term")?;
    let lang = params.lang(settings)?;
    let limit = params.count("limit", settings.limits.suggest, settings.limits.max)?;
    let list =
        suggest(&engine.ontology, &engine.graph, engine.index.counts(), term, &lang, limit).map_err(term_error)?;
    Ok(to_json(&list))
}

#[derive(Serialize)]
struct TermRef {
    uri: TermUri,
    label: String,
    kind: TermKind,
    count: usize,
}

#[derive(Serialize)]
struct EdgeView {
    kind: RelationKind,
    provenance: Provenance,
    similarity: f64,
}

#[derive(Serialize)]
struct Relative {
    #[serde(flatten)]
    term: TermRef,
    similarity: f64,
    edges: Vec<EdgeView>,
}

#[derive(Serialize)]
struct TopicBody<'a> {
    uri: &'a TermUri,
    kind: TermKind,
    label: String,
    labels: &'a [Label],
    count: usize,
    ancestors: Vec<TermRef>,
    children: Vec<TermRef>,
    relatives: Vec<Relative>,
    #[serde(skip_serializing_if = "Option::is_none")]
    process: Option<TermRef>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    ingredient_topics: Vec<TermRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    region: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    age_range: Option<(u32, u32)>,
}

/// `GET /api/topic/{uri}?lang`
pub fn topic(engine: &Engine, settings: &ApiSettings, uri: &str, params: &Params) -> Result<String, CliError> {
    let lang = params.lang(settings)?;
    let o = &engine.ontology;
    let node = o.node(uri).map_err(term_error)?;
    let count = |u: &TermUri| engine.index.counts().get(u).copied().unwrap_or(0);
    let term_ref = |u: &TermUri| -> Result<TermRef, CliError> {
        let n = o.node(u.as_str()).map_err(term_error)?;
        Ok(TermRef {
            uri: u.clone(),
            label: o.display_label(u.as_str(), &lang).map_err(term_error)?,
            kind: n.kind,
            count: count(u),
        })
    };

    // only topics have a hierarchy
    let (ancestors, children) = if node.kind == TermKind::Topic {
        (
            o.ancestors(uri).map_err(term_error)?.iter().map(term_ref).collect::<Result<_, _>>()?,
            o.children_of(uri).map_err(term_error)?.iter().map(term_ref).collect::<Result<_, _>>()?,
        )
    } else {
        (Vec::new(), Vec::new())
    };
    let mut relatives = Vec::new();
    for neighbor in engine.graph.neighbors(uri) {
        let edges = neighbor
            .edges
            .iter()
            .map(|e| EdgeView { kind: e.kind_from(uri), provenance: e.kind().provenance(), similarity: e.similarity() })
            .collect();
        relatives.push(Relative { term: term_ref(neighbor.uri)?, similarity: neighbor.effective_similarity(), edges });
    }
    relatives.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.term.uri.cmp(&b.term.uri)));

    let (process, ingredient_topics) = match o.ingredients_of(uri) {
        Ok((p, topics)) => (Some(term_ref(p)?), topics.iter().map(term_ref).collect::<Result<_, _>>()?),
        Err(_) => (None, Vec::new()),
    };
    Ok(to_json(&TopicBody {
        uri: &node.uri,
        kind: node.kind,
        label: o.display_label(uri, &lang).map_err(term_error)?,
        labels: &node.labels,
        count: count(&node.uri),
        ancestors,
        children,
        relatives,
        process,
        ingredient_topics,
        region: node.region.as_deref(),
        age_range: node.age_range,
    }))
}

/// `GET /api/status`
pub fn status(engine: &Engine) -> String {
    serde_json::json!({
        "generation": engine.generation,
        "terms": engine.ontology.len(),
        "resources": engine.index.len(),
        "related_pairs": engine.graph.pair_count(),
    })
    .to_string()
}
