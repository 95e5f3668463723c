//! `build-corpus`, `build-relatives` and `build-index`.
//!
//! Every artifact is a pure function of the inputs and the configuration
//! (no timestamps, sorted output), so repeated builds are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use topictrap_core::corpus::{build_corpus, write_atomic, CorpusReport, FetchMode, HttpSource, NoNetwork, PageSource};
use topictrap_core::index::load_resources;
use topictrap_core::relatives::{load_manual_edges, lsa_edges, merge, policy_edges, LsaReport};
use topictrap_core::{AcIndex, Corpus, Ontology, RelativesGraph, ResourceIndex};

use crate::config::ServiceConfig;
use crate::error::CliError;
use crate::store::{check_graph, publish};

fn load_ontology(path: &Path) -> Result<(String, Ontology), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let ontology = Ontology::parse(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok((text, ontology))
}

/// The ontology lines in uri order, so the published copy does not depend
/// on the input's line order.
fn canonical_lines(text: &str) -> String {
    let mut lines: Vec<(String, &str)> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let uri = serde_json::from_str::<serde_json::Value>(l)
                .ok()
                .and_then(|v| v.get("uri").and_then(|u| u.as_str()).map(str::to_string))
                .unwrap_or_default();
            (uri, l.trim_end())
        })
        .collect();
    lines.sort();
    lines.into_iter().map(|(_, l)| format!("{l}\n")).collect()
}

/// `<stem>.report.json` next to an artifact.
pub fn report_path(artifact: &Path) -> PathBuf {
    artifact.with_extension("report.json")
}

fn write_report<T: Serialize>(path: &Path, report: &T) -> Result<(), CliError> {
    let mut json = serde_json::to_string_pretty(report).expect("reports serialize");
    json.push('\n');
    write_parent(path)?;
    write_atomic(path, json.as_bytes()).map_err(CliError::io)
}

fn write_parent(path: &Path) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(format!("{}: {e}", parent.display())))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct CorpusSummary {
    pub documents: usize,
    pub failures: usize,
}

/// Fetches (online) or reads (offline) every definition, then writes the
/// corpus dump and its failure report.
pub fn corpus(config: &ServiceConfig, mode: Option<FetchMode>) -> Result<CorpusSummary, CliError> {
    let (_, ontology) = load_ontology(&config.paths.ontology)?;
    let mode = mode.unwrap_or(config.fetch.mode);
    let http;
    let source: &dyn PageSource = match mode {
        FetchMode::Online => {
            http = HttpSource::new(Duration::from_secs(config.fetch.timeout_s));
            &http
        }
        FetchMode::Offline => &NoNetwork,
    };
    let (corpus, report): (Corpus, CorpusReport) =
        build_corpus(&ontology, &config.corpus_settings(mode), source).map_err(CliError::io)?;
    write_parent(&config.paths.corpus)?;
    corpus.save(&config.paths.corpus).map_err(CliError::io)?;
    write_report(&report_path(&config.paths.corpus), &report)?;
    Ok(CorpusSummary { documents: corpus.len(), failures: report.failures.len() })
}

#[derive(Debug, Serialize)]
pub struct RelativesSummary {
    pub manual: usize,
    pub policy: usize,
    pub lsa: usize,
    pub pairs: usize,
}

#[derive(Serialize)]
struct RelativesReport<'a> {
    manual_edges: usize,
    policy_edges: usize,
    lsa_edges: usize,
    pairs: usize,
    lsa: &'a LsaReport,
}

/// Merges manual, structural and textual edges into the graph file.
/// Textual edges are computed for the configured languages only.
pub fn relatives(config: &ServiceConfig) -> Result<RelativesSummary, CliError> {
    let (_, ontology) = load_ontology(&config.paths.ontology)?;
    let manual = match &config.paths.manual_edges {
        Some(path) => {
            load_manual_edges(path, &ontology).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?
        }
        None => Vec::new(),
    };
    let policy = policy_edges(&ontology, &config.policy).map_err(CliError::data)?;

    let dump = &config.paths.corpus;
    if !dump.exists() {
        return Err(CliError::index(format!("{} is missing; run build-corpus first", dump.display())));
    }
    let full = Corpus::load(dump).map_err(|e| CliError::data(format!("{}: {e}", dump.display())))?;
    let mut corpus = Corpus::new();
    for (lang, docs) in full.iter() {
        if !config.languages.iter().any(|l| l == lang) {
            continue;
        }
        for (uri, text) in docs {
            if !ontology.contains(uri.as_str()) {
                return Err(CliError::data(format!("corpus document `{uri}` is not in the ontology")));
            }
            corpus.insert(lang, uri.clone(), text.clone()).map_err(CliError::data)?;
        }
    }
    let (lsa, lsa_report) = lsa_edges(&corpus, config.lsa.threshold, config.lsa.k_max).map_err(CliError::data)?;
    let graph = merge(&manual, &policy, &lsa).map_err(CliError::data)?;

    let path = &config.paths.relatives;
    write_parent(path)?;
    graph.save(path).map_err(CliError::io)?;
    let summary =
        RelativesSummary { manual: manual.len(), policy: policy.len(), lsa: lsa.len(), pairs: graph.pair_count() };
    write_report(
        &report_path(path),
        &RelativesReport {
            manual_edges: summary.manual,
            policy_edges: summary.policy,
            lsa_edges: summary.lsa,
            pairs: summary.pairs,
            lsa: &lsa_report,
        },
    )?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct IndexSummary {
    pub generation: String,
    pub resources: usize,
    pub autocomplete_entries: usize,
}

/// Indexes the resources, computes counts and the typeahead, and publishes
/// them with the ontology and relatives graph as a new generation.
pub fn index(config: &ServiceConfig) -> Result<IndexSummary, CliError> {
    let (ontology_text, ontology) = load_ontology(&config.paths.ontology)?;
    let resources = load_resources(&config.paths.resources)
        .map_err(|e| CliError::data(format!("{}: {e}", config.paths.resources.display())))?;
    let graph_path = &config.paths.relatives;
    if !graph_path.exists() {
        return Err(CliError::index(format!("{} is missing; run build-relatives first", graph_path.display())));
    }
    let graph =
        RelativesGraph::load(graph_path).map_err(|e| CliError::data(format!("{}: {e}", graph_path.display())))?;
    check_graph(&graph, &ontology).map_err(CliError::index)?;

    let index = ResourceIndex::build(resources, &ontology, config.weights).map_err(CliError::data)?;
    let ac = AcIndex::build(&ontology, index.counts(), config.autocomplete_include_zero);
    let generation = publish(&config.paths.index_dir, &canonical_lines(&ontology_text), &graph, &index, &ac)?;
    Ok(IndexSummary { generation, resources: index.len(), autocomplete_entries: ac.len() })
}
