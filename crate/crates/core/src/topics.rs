//! LDA topic model (collapsed Gibbs sampling) and the topic-relevance
//! group-performance measure.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::GroupTranscript;
use crate::error::{GcaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaOptions {
    pub topics: usize,
    /// Symmetric document–topic prior; `None` means `50 / K`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Gibbs sweeps used when scoring unseen text.
    pub fold_in_sweeps: usize,
}

impl Default for LdaOptions {
    fn default() -> Self {
        LdaOptions {
            topics: 20,
            alpha: None,
            beta: 0.01,
            iterations: 1000,
            seed: 7,
            fold_in_sweeps: 50,
        }
    }
}

/// A fitted LDA model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub fold_in_sweeps: usize,
    vocabulary: Vec<String>,
    index: BTreeMap<String, usize>,
    /// `topics × |V|`, rows sum to 1.
    phi: Vec<Vec<f64>>,
    /// Training document–topic proportions.
    theta: Vec<Vec<f64>>,
}

struct Sampler<'a> {
    docs: &'a [Vec<usize>],
    v: usize,
    alpha: f64,
    beta: f64,
    z: Vec<Vec<usize>>,
    doc_topic: Vec<Vec<u32>>,
    topic_word: Vec<Vec<u32>>,
    topic_total: Vec<u32>,
}

impl<'a> Sampler<'a> {
    fn new(
        docs: &'a [Vec<usize>],
        k: usize,
        v: usize,
        alpha: f64,
        beta: f64,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut s = Sampler {
            docs,
            v,
            alpha,
            beta,
            z: Vec::with_capacity(docs.len()),
            doc_topic: vec![vec![0; k]; docs.len()],
            topic_word: vec![vec![0; v]; k],
            topic_total: vec![0; k],
        };
        for (d, doc) in docs.iter().enumerate() {
            let zs: Vec<usize> = doc.iter().map(|_| rng.gen_range(0..k)).collect();
            for (&w, &t) in doc.iter().zip(&zs) {
                s.doc_topic[d][t] += 1;
                s.topic_word[t][w] += 1;
                s.topic_total[t] += 1;
            }
            s.z.push(zs);
        }
        s
    }

    fn sweep(&mut self, rng: &mut ChaCha8Rng, weights: &mut [f64]) {
        let vbeta = self.v as f64 * self.beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.z[d][i];
                self.doc_topic[d][old] -= 1;
                self.topic_word[old][w] -= 1;
                self.topic_total[old] -= 1;
                let mut total = 0.0;
                for (t, slot) in weights.iter_mut().enumerate() {
                    let p = (f64::from(self.doc_topic[d][t]) + self.alpha)
                        * (f64::from(self.topic_word[t][w]) + self.beta)
                        / (f64::from(self.topic_total[t]) + vbeta);
                    total += p;
                    *slot = total;
                }
                let new = draw(weights, total, rng);
                self.z[d][i] = new;
                self.doc_topic[d][new] += 1;
                self.topic_word[new][w] += 1;
                self.topic_total[new] += 1;
            }
        }
    }
}

/// Index into cumulative `weights` for a uniform draw in `[0, total)`.
fn draw(cumulative: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let u = rng.gen::<f64>() * total;
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

/// Fits LDA to tokenized documents.
///
/// Deterministic for a fixed seed.
pub fn fit_lda<S: AsRef<str>>(docs: &[Vec<S>], opts: &LdaOptions) -> Result<TopicModel> {
    let k = opts.topics;
    if k < 2 {
        return Err(GcaError::Argument(format!(
            "need at least 2 topics, got {k}"
        )));
    }
    if docs.iter().all(Vec::is_empty) {
        return Err(GcaError::EmptyInput("topic corpus has no tokens".into()));
    }
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for doc in docs {
        for t in doc {
            index.entry(t.as_ref().to_string()).or_insert(0);
        }
    }
    if index.len() < 2 {
        return Err(GcaError::Build(format!(
            "degenerate topic corpus: {} distinct term(s)",
            index.len()
        )));
    }
    let vocabulary: Vec<String> = index.keys().cloned().collect();
    for (i, term) in vocabulary.iter().enumerate() {
        index.insert(term.clone(), i);
    }
    let encoded: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| d.iter().map(|t| index[t.as_ref()]).collect())
        .collect();
    let alpha = opts.alpha.unwrap_or(50.0 / k as f64);
    if !(alpha > 0.0 && opts.beta > 0.0) {
        return Err(GcaError::Argument("alpha and beta must be positive".into()));
    }

    let v = vocabulary.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut sampler = Sampler::new(&encoded, k, v, alpha, opts.beta, &mut rng);
    let mut weights = vec![0.0; k];
    for _ in 0..opts.iterations {
        sampler.sweep(&mut rng, &mut weights);
    }

    let vbeta = v as f64 * opts.beta;
    let phi = (0..k)
        .map(|t| {
            let denom = f64::from(sampler.topic_total[t]) + vbeta;
            sampler.topic_word[t]
                .iter()
                .map(|&c| (f64::from(c) + opts.beta) / denom)
                .collect()
        })
        .collect();
    let kalpha = k as f64 * alpha;
    let theta = encoded
        .iter()
        .enumerate()
        .map(|(d, doc)| {
            let denom = doc.len() as f64 + kalpha;
            sampler.doc_topic[d]
                .iter()
                .map(|&c| (f64::from(c) + alpha) / denom)
                .collect()
        })
        .collect();

    Ok(TopicModel {
        topics: k,
        alpha,
        beta: opts.beta,
        seed: opts.seed,
        fold_in_sweeps: opts.fold_in_sweeps,
        vocabulary,
        index,
        phi,
        theta,
    })
}

impl TopicModel {
    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    /// Word distribution of topic `q`.
    pub fn phi(&self, q: usize) -> &[f64] {
        &self.phi[q]
    }

    /// Topic proportions of training document `d`.
    pub fn theta(&self, d: usize) -> &[f64] {
        &self.theta[d]
    }

    pub fn n_training_docs(&self) -> usize {
        self.theta.len()
    }

    /// Topic proportions of unseen text by Gibbs fold-in with the
    /// topic–word distributions held fixed.
    ///
    /// Unknown tokens are ignored; text with no known token gets the
    /// uniform distribution. The sampler is seeded from the model seed and
    /// the token sequence, so scores do not depend on call order.
    pub fn topic_scores<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let k = self.topics;
        let words: Vec<usize> = tokens
            .iter()
            .filter_map(|t| self.index.get(t.as_ref()).copied())
            .collect();
        if words.is_empty() {
            return vec![1.0 / k as f64; k];
        }
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        for &w in &words {
            hasher.update((w as u64).to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        let mut rng = ChaCha8Rng::from_seed(seed);

        let mut z: Vec<usize> = words.iter().map(|_| rng.gen_range(0..k)).collect();
        let mut counts = vec![0u32; k];
        for &t in &z {
            counts[t] += 1;
        }
        let sweeps = self.fold_in_sweeps.max(1);
        let burn_in = sweeps / 2;
        let mut acc = vec![0.0; k];
        let mut kept = 0usize;
        let mut weights = vec![0.0; k];
        for sweep in 0..sweeps {
            for (i, &w) in words.iter().enumerate() {
                counts[z[i]] -= 1;
                let mut total = 0.0;
                for t in 0..k {
                    total += self.phi[t][w] * (f64::from(counts[t]) + self.alpha);
                    weights[t] = total;
                }
                let new = draw(&weights, total, &mut rng);
                z[i] = new;
                counts[new] += 1;
            }
            if sweep >= burn_in {
                kept += 1;
                for t in 0..k {
                    acc[t] += f64::from(counts[t]);
                }
            }
        }
        let denom = words.len() as f64 + k as f64 * self.alpha;
        let mut scores: Vec<f64> = acc
            .iter()
            .map(|c| (c / kept as f64 + self.alpha) / denom)
            .collect();
        let sum: f64 = scores.iter().sum();
        scores.iter_mut().for_each(|s| *s /= sum);
        scores
    }

    /// The `n` most probable words of every topic.
    pub fn top_words(&self, n: usize) -> Vec<Vec<(String, f64)>> {
        self.phi
            .iter()
            .map(|row| {
                let mut idx: Vec<usize> = (0..row.len()).collect();
                idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
                idx.into_iter()
                    .take(n)
                    .map(|i| (self.vocabulary[i].clone(), row[i]))
                    .collect()
            })
            .collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::save_bundle(self, path.as_ref())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        crate::io::load_bundle(path.as_ref())
    }
}

/// Partition of the topics into relevant (on-task) and other topics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevanceSpec {
    relevant: BTreeSet<usize>,
    other: BTreeSet<usize>,
}

impl RelevanceSpec {
    /// Checks that the two sets partition `0..topics`.
    pub fn new(relevant: BTreeSet<usize>, other: BTreeSet<usize>, topics: usize) -> Result<Self> {
        if let Some(q) = relevant.intersection(&other).next() {
            return Err(GcaError::Argument(format!(
                "topic {q} is both relevant and not relevant"
            )));
        }
        let union: BTreeSet<usize> = relevant.union(&other).copied().collect();
        if union != (0..topics).collect() {
            return Err(GcaError::Argument(format!(
                "relevant/other topics do not partition 0..{topics}"
            )));
        }
        Ok(RelevanceSpec { relevant, other })
    }

    /// Relevant ids; every other topic is off-task.
    pub fn from_relevant(relevant: impl IntoIterator<Item = usize>, topics: usize) -> Result<Self> {
        let relevant: BTreeSet<usize> = relevant.into_iter().collect();
        if let Some(&q) = relevant.iter().find(|&&q| q >= topics) {
            return Err(GcaError::Argument(format!("topic {q} outside 0..{topics}")));
        }
        let other = (0..topics).filter(|q| !relevant.contains(q)).collect();
        RelevanceSpec::new(relevant, other, topics)
    }

    pub fn relevant(&self) -> &BTreeSet<usize> {
        &self.relevant
    }

    pub fn other(&self) -> &BTreeSet<usize> {
        &self.other
    }

    /// Mass on the relevant topics.
    pub fn score(&self, scores: &[f64]) -> f64 {
        self.relevant
            .iter()
            .map(|&q| scores[q])
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }
}

/// Topic relevance of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRelevance {
    pub group_id: String,
    /// Relevance of each contribution, in turn order.
    pub per_contribution: Vec<f64>,
    /// Mean over all contributions.
    pub relevance: f64,
}

pub fn topic_relevance(
    gt: &GroupTranscript,
    model: &TopicModel,
    spec: &RelevanceSpec,
) -> Result<GroupRelevance> {
    let topics = spec.relevant.len() + spec.other.len();
    if topics != model.topics {
        return Err(GcaError::Argument(format!(
            "relevance spec covers {topics} topics, model has {}",
            model.topics
        )));
    }
    let per_contribution: Vec<f64> = gt
        .contributions
        .par_iter()
        .map(|c| spec.score(&model.topic_scores(&c.tokens)))
        .collect();
    let relevance = per_contribution.iter().sum::<f64>() / per_contribution.len().max(1) as f64;
    Ok(GroupRelevance {
        group_id: gt.group_id.clone(),
        per_contribution,
        relevance,
    })
}
