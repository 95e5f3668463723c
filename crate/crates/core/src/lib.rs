//! Topic-based search over annotated resource collections.
//!
//! The crate covers the whole build and query pipeline:
//!
//! * [`ontology`]: typed topic / competency / level nodes loaded from a JSON-lines file.
//! * [`corpus`]: per-language definition texts, fetched once and cached on disk.
//! * [`lsa`]: latent-semantic similarity between definitions.
//! * [`relatives`]: the merged graph of related terms (manual, structural, textual).
//! * [`index`]: resources, ontology query expansion and expanded match counts.
//! * [`autocomplete`]: typeahead over every label, restricted to terms with results.
//! * [`suggest`]: related queries for a term, each guaranteed to return hits.

pub mod autocomplete;
pub mod corpus;
pub mod index;
pub mod lsa;
pub mod ontology;
pub mod relatives;
pub mod suggest;
pub mod text;

pub use autocomplete::{AcEntry, AcIndex};
pub use corpus::{Corpus, DefinitionRef, FetchMode};
pub use index::{MatchKind, Resource, ResourceIndex, SearchHit, SearchPage, SearchQuery, SearchWeights};
pub use ontology::{Label, Ontology, OntologyNode, TermKind, TermUri};
pub use relatives::{RelatedEdge, RelationKind, RelativesGraph};
pub use suggest::SuggestedQuery;
