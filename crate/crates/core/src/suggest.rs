//! Related-query suggestions for a term.
//!
//! Candidates are the term's neighbors in the relatives graph. Each carries
//! the similarity and provenance of the edge that justifies it plus its
//! expanded count; neighbors without results are never suggested.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ontology::{Ontology, TermError, TermKind, TermUri};
use crate::relatives::{Provenance, RelatedEdge, RelationKind, RelativesGraph};

pub const DEFAULT_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuggestedQuery {
    pub uri: TermUri,
    pub label: String,
    /// Relation as seen from the queried term.
    pub kind: RelationKind,
    pub provenance: Provenance,
    pub term_kind: TermKind,
    pub similarity: f64,
    pub count: usize,
}

/// Edge used to present a pair: the most similar edge, earlier provenance
/// winning ties. When the pair has a textual edge in the request language,
/// textual edges of other languages are not considered.
fn representative<'e>(edges: &'e [RelatedEdge], lang: &str) -> Option<&'e RelatedEdge> {
    let has_lang = edges.iter().any(|e| matches!(e.kind(), RelationKind::Lsa(l) if l == lang));
    edges
        .iter()
        .filter(|e| match e.kind() {
            RelationKind::Lsa(l) => !has_lang || l == lang,
            _ => true,
        })
        .max_by(|x, y| {
            x.similarity().total_cmp(&y.similarity()).then_with(|| y.kind().provenance().cmp(&x.kind().provenance()))
        })
}

/// Suggestions for `uri`, most similar first.
pub fn suggest(
    ontology: &Ontology,
    graph: &RelativesGraph,
    counts: &BTreeMap<TermUri, usize>,
    uri: &str,
    lang: &str,
    limit: usize,
) -> Result<Vec<SuggestedQuery>, TermError> {
    ontology.node(uri)?;
    let mut out = Vec::new();
    for neighbor in graph.neighbors(uri) {
        let count = counts.get(neighbor.uri).copied().unwrap_or(0);
        let Some(edge) = representative(neighbor.edges, lang) else { continue };
        let Ok(node) = ontology.node(neighbor.uri.as_str()) else { continue };
        if count == 0 || edge.similarity() <= 0.0 {
            continue;
        }
        out.push(SuggestedQuery {
            uri: neighbor.uri.clone(),
            label: ontology.display_label(neighbor.uri.as_str(), lang)?,
            kind: edge.kind_from(uri),
            provenance: edge.kind().provenance(),
            term_kind: node.kind,
            similarity: edge.similarity(),
            count,
        });
    }
    out.sort_by(|a, b| {
        b.similarity.total_cmp(&a.similarity).then(a.provenance.cmp(&b.provenance)).then(a.uri.cmp(&b.uri))
    });
    out.truncate(limit);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONTOLOGY: &str = r#"{"uri":"conic","kind":"topic","labels":[{"lang":"en","text":"Conic section","preferred":true}]}
{"uri":"ellipse","kind":"topic","parents":["conic"],"labels":[{"lang":"en","text":"Ellipse","preferred":true},{"lang":"de","text":"Ellipse","preferred":true}]}
{"uri":"cone","kind":"topic","labels":[{"lang":"en","text":"Cone","preferred":true},{"lang":"de","text":"Kegel","preferred":true}]}
{"uri":"disc","kind":"topic","labels":[{"lang":"en","text":"Disc","preferred":true}]}
{"uri":"empty","kind":"topic"}"#;

    fn uri(s: &str) -> TermUri {
        TermUri::new(s).unwrap()
    }

    fn edge(a: &str, b: &str, sim: f64, kind: RelationKind) -> RelatedEdge {
        RelatedEdge::new(uri(a), uri(b), sim, kind).unwrap()
    }

    fn setup() -> (Ontology, RelativesGraph, BTreeMap<TermUri, usize>) {
        let o = Ontology::parse(ONTOLOGY).unwrap();
        let g = RelativesGraph::from_edges([
            edge("ellipse", "conic", 0.9, RelationKind::PolicyParent),
            edge("ellipse", "cone", 0.4, RelationKind::Lsa("en".into())),
            edge("ellipse", "cone", 0.6, RelationKind::Lsa("de".into())),
            edge("ellipse", "disc", 1.0, RelationKind::Manual),
            edge("ellipse", "empty", 0.8, RelationKind::Manual),
        ])
        .unwrap();
        let counts = [("conic", 3), ("ellipse", 2), ("cone", 1), ("disc", 4), ("empty", 0)]
            .into_iter()
            .map(|(u, c)| (uri(u), c))
            .collect();
        (o, g, counts)
    }

    #[test]
    fn ordered_filtered_and_labeled() {
        let (o, g, counts) = setup();
        let got = suggest(&o, &g, &counts, "ellipse", "en", DEFAULT_LIMIT).unwrap();
        let uris: Vec<&str> = got.iter().map(|s| s.uri.as_str()).collect();
        assert_eq!(uris, vec!["disc", "conic", "cone"]);
        assert_eq!(got[1].label, "Conic section");
        assert_eq!(got[1].kind, RelationKind::PolicyParent);
        assert_eq!(got[1].provenance, Provenance::Policy);
        assert!(got.iter().all(|s| s.count > 0));
    }

    #[test]
    fn request_language_edge_is_preferred() {
        let (o, g, counts) = setup();
        let en = suggest(&o, &g, &counts, "ellipse", "en", 10).unwrap();
        let de = suggest(&o, &g, &counts, "ellipse", "de", 10).unwrap();
        let cone_en = en.iter().find(|s| s.uri.as_str() == "cone").unwrap();
        let cone_de = de.iter().find(|s| s.uri.as_str() == "cone").unwrap();
        assert_eq!(cone_en.similarity, 0.4);
        assert_eq!(cone_de.similarity, 0.6);
        assert_eq!(cone_de.label, "Kegel");
        // no french edge: the strongest one represents the pair
        let fr = suggest(&o, &g, &counts, "ellipse", "fr", 10).unwrap();
        assert_eq!(fr.iter().find(|s| s.uri.as_str() == "cone").unwrap().similarity, 0.6);
    }

    #[test]
    fn textual_edge_does_not_hide_a_stronger_structural_one() {
        let (o, _, counts) = setup();
        let g = RelativesGraph::from_edges([
            edge("ellipse", "conic", 0.9, RelationKind::PolicyParent),
            edge("ellipse", "conic", 0.3, RelationKind::Lsa("en".into())),
            edge("ellipse", "conic", 0.95, RelationKind::Lsa("de".into())),
        ])
        .unwrap();
        let en = suggest(&o, &g, &counts, "ellipse", "en", 10).unwrap();
        assert_eq!((en[0].similarity, &en[0].kind), (0.9, &RelationKind::PolicyParent));
        let fr = suggest(&o, &g, &counts, "ellipse", "fr", 10).unwrap();
        assert_eq!((fr[0].similarity, &fr[0].kind), (0.95, &RelationKind::Lsa("de".into())));
    }

    #[test]
    fn ties_prefer_earlier_provenance() {
        let (o, _, counts) = setup();
        let g = RelativesGraph::from_edges([
            edge("ellipse", "conic", 0.9, RelationKind::Lsa("en".into())),
            edge("ellipse", "conic", 0.9, RelationKind::PolicyParent),
        ])
        .unwrap();
        let got = suggest(&o, &g, &counts, "ellipse", "en", 10).unwrap();
        assert_eq!(got[0].provenance, Provenance::Policy);
    }

    #[test]
    fn relation_is_seen_from_the_query() {
        let (o, g, counts) = setup();
        let got = suggest(&o, &g, &counts, "conic", "en", 10).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].kind, RelationKind::PolicyChild);
    }

    #[test]
    fn limit_and_unknown() {
        let (o, g, counts) = setup();
        assert_eq!(suggest(&o, &g, &counts, "ellipse", "en", 1).unwrap().len(), 1);
        assert!(suggest(&o, &g, &counts, "disc", "en", 10).unwrap().iter().all(|s| s.uri.as_str() == "ellipse"));
        assert!(matches!(suggest(&o, &g, &counts, "zzz", "en", 10), Err(TermError::UnknownTerm(_))));
    }
}
