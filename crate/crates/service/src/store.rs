//! Published index generations.
//!
//! Every `build-index` run writes a self-contained generation directory
//! under `<index_dir>/generations/`, named after the hash of its content,
//! then points `<index_dir>/CURRENT` at it with an atomic rename. Readers
//! resolve `CURRENT` once and load everything from that one directory, so
//! they see either the old or the new generation, never a mix.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use topictrap_core::corpus::write_atomic;
use topictrap_core::{AcIndex, Ontology, RelativesGraph, ResourceIndex};

use crate::error::CliError;

pub const CURRENT: &str = "CURRENT";
const GENERATIONS: &str = "generations";
pub const ONTOLOGY_FILE: &str = "ontology.jsonl";
pub const RELATIVES_FILE: &str = "relatives.jsonl";
pub const AUTOCOMPLETE_FILE: &str = "autocomplete.json";

/// Content hash of every regular file in `dir`, in name order.
fn hash_dir(dir: &Path) -> Result<String, CliError> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(CliError::io)?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect::<Result<_, _>>()
        .map_err(CliError::io)?;
    names.sort();
    let mut hasher = Sha256::new();
    for name in names {
        let bytes = fs::read(dir.join(&name)).map_err(CliError::io)?;
        hasher.update((name.len() as u64).to_le_bytes());
        hasher.update(name.as_bytes());
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hasher.finalize().iter().take(12).map(|b| format!("{b:02x}")).collect())
}

/// Generation named in `CURRENT`, if any.
pub fn current_generation(index_dir: &Path) -> Result<Option<String>, CliError> {
    let path = index_dir.join(CURRENT);
    match fs::read_to_string(&path) {
        Ok(s) => {
            let name = s.trim().to_string();
            if name.is_empty() || name.contains(['/', '\\', '.']) {
                return Err(CliError::index(format!("{} is malformed", path.display())));
            }
            Ok(Some(name))
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(CliError::io(format!("{}: {e}", path.display()))),
    }
}

pub fn generation_dir(index_dir: &Path, name: &str) -> PathBuf {
    index_dir.join(GENERATIONS).join(name)
}

/// Writes a generation, switches `CURRENT` to it and prunes generations
/// older than the previous one. Returns the generation name.
pub fn publish(
    index_dir: &Path,
    ontology_text: &str,
    graph: &RelativesGraph,
    index: &ResourceIndex,
    autocomplete: &AcIndex,
) -> Result<String, CliError> {
    let generations = index_dir.join(GENERATIONS);
    fs::create_dir_all(&generations).map_err(|e| CliError::io(format!("{}: {e}", generations.display())))?;
    let staging = tempfile::Builder::new().prefix(".staging-").tempdir_in(&generations).map_err(CliError::io)?;
    fs::write(staging.path().join(ONTOLOGY_FILE), ontology_text).map_err(CliError::io)?;
    fs::write(staging.path().join(RELATIVES_FILE), graph.to_text()).map_err(CliError::io)?;
    fs::write(staging.path().join(AUTOCOMPLETE_FILE), autocomplete.to_json()).map_err(CliError::io)?;
    index.save(staging.path()).map_err(CliError::io)?;

    let name = hash_dir(staging.path())?;
    let target = generations.join(&name);
    if target.exists() {
        // identical content is already published
        drop(staging);
    } else {
        let staged = staging.keep();
        fs::rename(&staged, &target).map_err(|e| CliError::io(format!("{}: {e}", target.display())))?;
    }

    let previous = current_generation(index_dir)?;
    write_atomic(&index_dir.join(CURRENT), format!("{name}\n").as_bytes()).map_err(CliError::io)?;

    let keep: BTreeSet<&str> = [Some(name.as_str()), previous.as_deref()].into_iter().flatten().collect();
    for entry in fs::read_dir(&generations).map_err(CliError::io)? {
        let entry = entry.map_err(CliError::io)?;
        let file_name = entry.file_name().to_string_lossy().into_owned();
        if !keep.contains(file_name.as_str()) && !file_name.starts_with(".staging-") {
            if let Err(e) = fs::remove_dir_all(entry.path()) {
                log::warn!("cannot prune generation {file_name}: {e}");
            }
        }
    }
    Ok(name)
}

/// Query-time state: everything loaded from one generation.
#[derive(Debug)]
pub struct Engine {
    pub generation: String,
    pub ontology: Ontology,
    pub graph: RelativesGraph,
    pub index: ResourceIndex,
    pub autocomplete: AcIndex,
}

impl Engine {
    /// Loads the generation `CURRENT` points at.
    pub fn load(index_dir: &Path) -> Result<Self, CliError> {
        let name = current_generation(index_dir)?.ok_or_else(|| {
            CliError::index(format!("no index published in {}; run build-index first", index_dir.display()))
        })?;
        Self::load_generation(index_dir, &name)
    }

    pub fn load_generation(index_dir: &Path, name: &str) -> Result<Self, CliError> {
        let dir = generation_dir(index_dir, name);
        let at = |file: &str| dir.join(file);
        let ontology = Ontology::load(at(ONTOLOGY_FILE)).map_err(|e| CliError::index(format!("{name}: {e}")))?;
        let graph = RelativesGraph::load(&at(RELATIVES_FILE)).map_err(|e| CliError::index(format!("{name}: {e}")))?;
        check_graph(&graph, &ontology).map_err(|e| CliError::index(format!("{name}: {e}")))?;
        let index = ResourceIndex::load(&dir, &ontology).map_err(|e| CliError::index(format!("{name}: {e}")))?;
        let autocomplete =
            AcIndex::load(&at(AUTOCOMPLETE_FILE)).map_err(|e| CliError::index(format!("{name}: {e}")))?;
        Ok(Engine { generation: name.to_string(), ontology, graph, index, autocomplete })
    }
}

/// Every graph endpoint must be an ontology term.
pub fn check_graph(graph: &RelativesGraph, ontology: &Ontology) -> Result<(), String> {
    for edge in graph.edges() {
        for uri in [edge.a(), edge.b()] {
            if !ontology.contains(uri.as_str()) {
                return Err(format!("relatives graph references unknown term `{uri}`"));
            }
        }
    }
    Ok(())
}
