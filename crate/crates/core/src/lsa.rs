//! Latent-semantic similarity over the definitions of one language.
//!
//! Documents are weighted with raw term frequency times `ln(N / df)`,
//! reduced with a truncated SVD and compared by cosine in the reduced space.

mod svd;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::TermUri;
use crate::text::tokenize;
pub use svd::{thin_svd, Svd};

pub const DEFAULT_K_MAX: usize = 100;
pub const DEFAULT_THRESHOLD: f64 = 0.25;

#[derive(Debug, Error, PartialEq)]
pub enum LsaError {
    #[error("{lang} corpus has {docs} usable documents, at least 2 are needed")]
    CorpusTooSmall { lang: String, docs: usize },
    #[error("singular value decomposition did not converge")]
    NumericalFailure,
    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid reduced space dump: {0}")]
    Dump(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// No token left after tokenization.
    NoTokens,
    /// Every token occurs in all documents, so every weight is zero.
    ZeroWeight,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DroppedDoc {
    pub uri: TermUri,
    pub reason: DropReason,
}

/// Weighted term-document matrix of one language.
#[derive(Clone, Debug, PartialEq)]
pub struct TermDocMatrix {
    lang: String,
    terms: Vec<String>,
    idf: Vec<f64>,
    docs: Vec<TermUri>,
    /// One column per document, indexed like `terms`.
    columns: Vec<Vec<f64>>,
    dropped: Vec<DroppedDoc>,
}

impl TermDocMatrix {
    /// Tokenizes and weights `documents`. Documents without tokens or with
    /// an all-zero column are dropped and listed in [`TermDocMatrix::dropped`].
    pub fn build(documents: &BTreeMap<TermUri, String>, lang: &str) -> Result<Self, LsaError> {
        let mut dropped = Vec::new();
        let mut counted: Vec<(TermUri, BTreeMap<String, usize>)> = Vec::new();
        for (uri, text) in documents {
            let tokens = tokenize(text, lang);
            if tokens.is_empty() {
                dropped.push(DroppedDoc { uri: uri.clone(), reason: DropReason::NoTokens });
                continue;
            }
            let mut tf = BTreeMap::new();
            for t in tokens {
                *tf.entry(t).or_insert(0usize) += 1;
            }
            counted.push((uri.clone(), tf));
        }
        let too_small = |docs| LsaError::CorpusTooSmall { lang: lang.to_string(), docs };
        if counted.len() < 2 {
            return Err(too_small(counted.len()));
        }

        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for (_, tf) in &counted {
            for term in tf.keys() {
                *df.entry(term.as_str()).or_insert(0) += 1;
            }
        }
        let n = counted.len() as f64;
        let terms: Vec<String> = df.keys().map(|t| t.to_string()).collect();
        let idf: Vec<f64> = df.values().map(|&d| (n / d as f64).ln()).collect();
        let position: BTreeMap<&str, usize> = terms.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();

        let mut docs = Vec::new();
        let mut columns = Vec::new();
        for (uri, tf) in &counted {
            let mut column = vec![0.0; terms.len()];
            for (term, &count) in tf {
                let i = position[term.as_str()];
                column[i] = count as f64 * idf[i];
            }
            if column.iter().all(|w| *w == 0.0) {
                dropped.push(DroppedDoc { uri: uri.clone(), reason: DropReason::ZeroWeight });
                continue;
            }
            docs.push(uri.clone());
            columns.push(column);
        }
        if docs.len() < 2 {
            return Err(too_small(docs.len()));
        }
        dropped.sort_by(|a, b| a.uri.cmp(&b.uri));
        Ok(TermDocMatrix { lang: lang.to_string(), terms, idf, docs, columns, dropped })
    }

    pub fn lang(&self) -> &str {
        &self.lang
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn docs(&self) -> &[TermUri] {
        &self.docs
    }

    pub fn dropped(&self) -> &[DroppedDoc] {
        &self.dropped
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok().map(|i| self.idf[i])
    }

    pub fn weight(&self, term: &str, doc: &str) -> Option<f64> {
        let t = self.terms.binary_search_by(|x| x.as_str().cmp(term)).ok()?;
        let d = self.docs.iter().position(|u| u.as_str() == doc)?;
        Some(self.columns[d][t])
    }

    pub fn column(&self, doc: &str) -> Option<&[f64]> {
        let d = self.docs.iter().position(|u| u.as_str() == doc)?;
        Some(&self.columns[d])
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }
}

pub fn build_matrix(documents: &BTreeMap<TermUri, String>, lang: &str) -> Result<TermDocMatrix, LsaError> {
    TermDocMatrix::build(documents, lang)
}

const DUMP_FORMAT: &str = "topictrap-lsa";
const DUMP_VERSION: u32 = 1;

/// Rank-reduced document space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedSpace {
    format: String,
    version: u32,
    lang: String,
    terms: Vec<String>,
    idf: Vec<f64>,
    /// `k` left singular vectors, each of vocabulary length.
    basis: Vec<Vec<f64>>,
    singular_values: Vec<f64>,
    docs: Vec<TermUri>,
    doc_vectors: Vec<Vec<f64>>,
}

/// Truncated SVD of the matrix with `k = min(k_max, rank)`. Each left
/// singular vector is signed so that its largest-magnitude entry is positive.
pub fn reduce(matrix: &TermDocMatrix, k_max: usize) -> Result<ReducedSpace, LsaError> {
    let svd = thin_svd(&matrix.columns).ok_or(LsaError::NumericalFailure)?;
    let sigma_max = svd.sigma.first().copied().unwrap_or(0.0);
    let rows = matrix.terms.len();
    let tol = sigma_max * rows.max(matrix.docs.len()) as f64 * f64::EPSILON;
    let rank = svd.sigma.iter().take_while(|s| **s > tol).count();
    let k = k_max.max(1).min(rank);
    if k == 0 {
        return Err(LsaError::NumericalFailure);
    }

    let mut basis = Vec::with_capacity(k);
    for column in svd.u.iter().take(k) {
        let mut column = column.clone();
        let pivot = column
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |best, (i, x)| if x.abs() > best.1 { (i, x.abs()) } else { best })
            .0;
        if column[pivot] < 0.0 {
            column.iter_mut().for_each(|x| *x = -*x);
        }
        basis.push(column);
    }
    let doc_vectors = matrix.columns.iter().map(|col| project(&basis, col)).collect();

    Ok(ReducedSpace {
        format: DUMP_FORMAT.to_string(),
        version: DUMP_VERSION,
        lang: matrix.lang.clone(),
        terms: matrix.terms.clone(),
        idf: matrix.idf.clone(),
        basis,
        singular_values: svd.sigma[..k].to_vec(),
        docs: matrix.docs.clone(),
        doc_vectors,
    })
}

fn project(basis: &[Vec<f64>], column: &[f64]) -> Vec<f64> {
    basis.iter().map(|u| u.iter().zip(column).map(|(a, b)| a * b).sum()).collect()
}

impl ReducedSpace {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn lang(&self) -> &str {
        &self.lang
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn docs(&self) -> &[TermUri] {
        &self.docs
    }

    pub fn doc_vector(&self, doc: &str) -> Option<&[f64]> {
        let d = self.docs.iter().position(|u| u.as_str() == doc)?;
        Some(&self.doc_vectors[d])
    }

    /// Projects a new text with the stored vocabulary and idf weights.
    /// Out-of-vocabulary tokens are ignored.
    pub fn fold_in(&self, text: &str) -> Vec<f64> {
        let mut column = vec![0.0; self.terms.len()];
        for token in tokenize(text, &self.lang) {
            if let Ok(i) = self.terms.binary_search(&token) {
                column[i] += self.idf[i];
            }
        }
        project(&self.basis, &column)
    }

    /// Rank-k approximation of the weighted matrix, one column per document.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        self.doc_vectors
            .iter()
            .map(|coords| {
                (0..self.terms.len()).map(|row| self.basis.iter().zip(coords).map(|(u, c)| u[row] * c).sum()).collect()
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reduced space serializes")
    }

    pub fn from_json(raw: &str) -> Result<Self, LsaError> {
        let space: ReducedSpace = serde_json::from_str(raw).map_err(|e| LsaError::Dump(e.to_string()))?;
        if space.format != DUMP_FORMAT || space.version != DUMP_VERSION {
            return Err(LsaError::Dump(format!("unsupported format {} v{}", space.format, space.version)));
        }
        Ok(space)
    }
}

/// Cosine of two vectors; 0 when either norm is below 1e-12.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, LsaError> {
    if a.len() != b.len() {
        return Err(LsaError::LengthMismatch { left: a.len(), right: b.len() });
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na < 1e-12 || nb < 1e-12 {
        return Ok(0.0);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarPair {
    pub a: TermUri,
    pub b: TermUri,
    pub similarity: f64,
}

/// Every unordered document pair whose clamped cosine reaches `threshold`,
/// sorted by similarity descending, then by pair.
pub fn all_pairs(space: &ReducedSpace, threshold: f64) -> Vec<SimilarPair> {
    let mut pairs = Vec::new();
    for i in 0..space.docs.len() {
        for j in (i + 1)..space.docs.len() {
            let sim = cosine(&space.doc_vectors[i], &space.doc_vectors[j]).expect("equal lengths").max(0.0);
            if sim >= threshold {
                let (a, b) = if space.docs[i] <= space.docs[j] { (i, j) } else { (j, i) };
                pairs.push(SimilarPair { a: space.docs[a].clone(), b: space.docs[b].clone(), similarity: sim });
            }
        }
    }
    pairs.sort_by(|x, y| y.similarity.total_cmp(&x.similarity).then_with(|| x.a.cmp(&y.a)).then_with(|| x.b.cmp(&y.b)));
    pairs
}
