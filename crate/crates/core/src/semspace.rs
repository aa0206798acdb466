//! Latent semantic space: weighted term–document matrix, truncated SVD and
//! projection of contributions.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{BackgroundDocument, GroupTranscript};
use crate::error::{GcaError, Result};
use crate::linalg::{self, SparseMatrix, Svd, SvdOptions};

/// Dimensionality used when none is requested.
pub const DEFAULT_DIMS: usize = 300;

/// Row weighting applied to raw counts before factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    #[default]
    LogEntropy,
    TfIdf,
}

impl std::str::FromStr for Weighting {
    type Err = GcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log-entropy" => Ok(Weighting::LogEntropy),
            "tf-idf" | "tfidf" => Ok(Weighting::TfIdf),
            other => Err(GcaError::Argument(format!("unknown weighting `{other}`"))),
        }
    }
}

/// Raw term counts; rows are terms in sorted order, columns are documents.
#[derive(Debug, Clone)]
pub struct TermDocumentMatrix {
    pub terms: Vec<String>,
    pub counts: SparseMatrix,
}

impl TermDocumentMatrix {
    /// Counts every token of every document. Needs at least one document.
    pub fn count(docs: &[BackgroundDocument]) -> Result<Self> {
        Self::count_pruned(docs, 1)
    }

    /// Like [`TermDocumentMatrix::count`], dropping terms seen in fewer than
    /// `min_doc_freq` documents.
    pub fn count_pruned(docs: &[BackgroundDocument], min_doc_freq: usize) -> Result<Self> {
        if docs.is_empty() {
            return Err(GcaError::Build("no documents".into()));
        }
        let mut per_term: BTreeMap<&str, BTreeMap<usize, f64>> = BTreeMap::new();
        for (j, doc) in docs.iter().enumerate() {
            for tok in &doc.tokens {
                *per_term.entry(tok).or_default().entry(j).or_insert(0.0) += 1.0;
            }
        }
        let mut terms = Vec::new();
        let mut rows = Vec::new();
        for (term, cols) in per_term {
            if cols.len() >= min_doc_freq {
                terms.push(term.to_string());
                rows.push(cols.into_iter().collect());
            }
        }
        Ok(TermDocumentMatrix {
            terms,
            counts: SparseMatrix::from_row_entries(docs.len(), rows),
        })
    }

    pub fn n_docs(&self) -> usize {
        self.counts.cols()
    }

    /// Applies the chosen weighting; returns the weighted matrix and the
    /// per-term global weights.
    pub fn weight(&self, weighting: Weighting) -> (SparseMatrix, Vec<f64>) {
        match weighting {
            Weighting::LogEntropy => log_entropy_weight(&self.counts),
            Weighting::TfIdf => tf_idf_weight(&self.counts),
        }
    }
}

/// Builds the count matrix and rejects corpora with fewer than two
/// documents or two distinct (retained) terms.
pub fn build_term_document_matrix(
    docs: &[BackgroundDocument],
    min_doc_freq: usize,
) -> Result<TermDocumentMatrix> {
    if docs.len() < 2 {
        return Err(GcaError::Build(format!(
            "degenerate corpus: {} document(s), need at least 2",
            docs.len()
        )));
    }
    let tdm = TermDocumentMatrix::count_pruned(docs, min_doc_freq.max(1))?;
    if tdm.terms.len() < 2 {
        return Err(GcaError::Build(format!(
            "degenerate corpus: {} distinct term(s), need at least 2",
            tdm.terms.len()
        )));
    }
    Ok(tdm)
}

/// `log2(1 + tf) · (1 + Σ_j p_ij log2 p_ij / log2 N)`.
pub fn log_entropy_weight(counts: &SparseMatrix) -> (SparseMatrix, Vec<f64>) {
    let n_docs = counts.cols() as f64;
    let log_n = n_docs.log2();
    let globals: Vec<f64> = (0..counts.rows())
        .map(|i| {
            let total: f64 = counts.row(i).map(|(_, v)| v).sum();
            if total <= 0.0 || log_n <= 0.0 {
                return 1.0;
            }
            let plogp: f64 = counts
                .row(i)
                .map(|(_, tf)| {
                    let p = tf / total;
                    p * p.log2()
                })
                .sum();
            1.0 + plogp / log_n
        })
        .collect();
    let weighted = counts.map_values(|i, _, tf| (1.0 + tf).log2() * globals[i]);
    (weighted, globals)
}

/// `tf · ln(N / df)`.
pub fn tf_idf_weight(counts: &SparseMatrix) -> (SparseMatrix, Vec<f64>) {
    let n_docs = counts.cols() as f64;
    let globals: Vec<f64> = (0..counts.rows())
        .map(|i| {
            let df = counts.row(i).count() as f64;
            if df == 0.0 {
                0.0
            } else {
                (n_docs / df).ln()
            }
        })
        .collect();
    let weighted = counts.map_values(|i, _, tf| tf * globals[i]);
    (weighted, globals)
}

/// Build-time settings for a [`SemanticSpace`].
#[derive(Debug, Clone, Copy)]
pub struct SpaceOptions {
    pub dims: usize,
    pub weighting: Weighting,
    pub min_doc_freq: usize,
    pub svd: SvdOptions,
}

impl Default for SpaceOptions {
    fn default() -> Self {
        SpaceOptions {
            dims: DEFAULT_DIMS,
            weighting: Weighting::LogEntropy,
            min_doc_freq: 1,
            svd: SvdOptions::default(),
        }
    }
}

/// An immutable LSA space.
///
/// Term vectors are the unit-normalized rows of `U_d Σ_d`. Terms whose row
/// vanishes (for instance a word spread uniformly over every document under
/// log-entropy weighting) carry no direction and are left out of the
/// vocabulary, so they behave as out-of-vocabulary words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticSpace {
    vocabulary: BTreeMap<String, usize>,
    dims: usize,
    term_vectors: Vec<f64>,
    global_weights: Vec<f64>,
    singular_values: Vec<f64>,
    weighting: Weighting,
    fingerprint: String,
}

/// A contribution's position in the space.
#[derive(Debug, Clone, PartialEq)]
pub struct DocVector {
    /// 1-based contribution index within its group.
    pub index: usize,
    pub vector: Vec<f64>,
}

impl SemanticSpace {
    /// Weights, factorizes and packages a corpus.
    pub fn build(docs: &[BackgroundDocument], opts: &SpaceOptions) -> Result<Self> {
        let tdm = build_term_document_matrix(docs, opts.min_doc_freq)?;
        let (weighted, globals) = tdm.weight(opts.weighting);
        let svd = linalg::truncated_svd(&weighted, opts.dims, opts.svd)?;
        Self::from_svd(
            &tdm.terms,
            &globals,
            &svd,
            opts.weighting,
            corpus_fingerprint(docs),
        )
    }

    /// Packages an existing factorization.
    pub fn from_svd(
        terms: &[String],
        global_weights: &[f64],
        svd: &Svd,
        weighting: Weighting,
        fingerprint: String,
    ) -> Result<Self> {
        let d = svd.rank();
        if d == 0 {
            return Err(GcaError::Build("weighted matrix has rank 0".into()));
        }
        if svd.u.rows() != terms.len() || global_weights.len() != terms.len() {
            return Err(GcaError::DimensionMismatch {
                expected: terms.len(),
                found: svd.u.rows(),
            });
        }
        let mut vocabulary = BTreeMap::new();
        let mut term_vectors = Vec::new();
        let mut weights = Vec::new();
        let scale = svd.s[0];
        for (i, term) in terms.iter().enumerate() {
            let mut row: Vec<f64> = (0..d).map(|c| svd.u.get(i, c) * svd.s[c]).collect();
            let len = linalg::norm(&row);
            if len <= 1e-12 * scale {
                continue;
            }
            row.iter_mut().for_each(|x| *x /= len);
            vocabulary.insert(term.clone(), weights.len());
            term_vectors.extend(row);
            weights.push(global_weights[i]);
        }
        if vocabulary.is_empty() {
            return Err(GcaError::Build("no term keeps a nonzero vector".into()));
        }
        Ok(SemanticSpace {
            vocabulary,
            dims: d,
            term_vectors,
            global_weights: weights,
            singular_values: svd.s.clone(),
            weighting,
            fingerprint,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn vocabulary_len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.vocabulary.contains_key(term)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.vocabulary.keys().map(String::as_str)
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn global_weight(&self, term: &str) -> Option<f64> {
        self.vocabulary.get(term).map(|&i| self.global_weights[i])
    }

    /// Unit vector for `term`, if it is in the vocabulary.
    pub fn term_vector(&self, term: &str) -> Option<&[f64]> {
        self.vocabulary
            .get(term)
            .map(|&i| &self.term_vectors[i * self.dims..(i + 1) * self.dims])
    }

    /// Sum of the term vectors of `tokens`, with multiplicity.
    ///
    /// Unknown tokens are skipped; the result is not renormalized.
    pub fn project<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let mut out = vec![0.0; self.dims];
        for t in tokens {
            if let Some(v) = self.term_vector(t.as_ref()) {
                linalg::axpy(1.0, v, &mut out);
            }
        }
        out
    }

    /// Projects every contribution of a group, in turn order.
    pub fn project_transcript(&self, gt: &GroupTranscript) -> Vec<DocVector> {
        gt.contributions
            .iter()
            .map(|c| DocVector {
                index: c.index,
                vector: self.project(&c.tokens),
            })
            .collect()
    }

    /// Writes JSON when the path ends in `.json`, a bincode bundle otherwise.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::save_bundle(self, path.as_ref())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(GcaError::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "semantic space not found"),
            ));
        }
        crate::io::load_bundle(path)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Cosine similarity; 0 when either vector has zero length.
pub fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let nu = linalg::norm(u);
    let nv = linalg::norm(v);
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (linalg::dot(u, v) / (nu * nv)).clamp(-1.0, 1.0)
}

/// SHA-256 over document ids and tokens.
pub fn corpus_fingerprint(docs: &[BackgroundDocument]) -> String {
    let mut h = Sha256::new();
    for d in docs {
        h.update(d.doc_id.as_bytes());
        h.update([0u8]);
        for t in &d.tokens {
            h.update(t.as_bytes());
            h.update([1u8]);
        }
        h.update([2u8]);
    }
    hex::encode(h.finalize())
}
