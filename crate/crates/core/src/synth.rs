//! Deterministic synthetic data: planted-role feature blobs and scripted
//! conversations over a closed vocabulary.

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::GroupTranscript;
use crate::error::{GcaError, Result};
use crate::linalg::{Matrix, Svd};
use crate::roles::{FeatureTable, ARCHETYPE_MEANS, ARCHETYPE_SDS, FEATURE_NAMES};
use crate::semspace::{SemanticSpace, Weighting};

/// Axis-aligned Gaussian clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub means: Vec<Vec<f64>>,
    pub sds: Vec<Vec<f64>>,
    pub per_cluster: usize,
    pub seed: u64,
}

impl BlobSpec {
    /// The six role archetypes with their spreads.
    pub fn table4(per_cluster: usize, seed: u64) -> Self {
        BlobSpec {
            means: ARCHETYPE_MEANS.iter().map(|r| r.to_vec()).collect(),
            sds: ARCHETYPE_SDS.iter().map(|r| r.to_vec()).collect(),
            per_cluster,
            seed,
        }
    }

    /// Looks up a named preset.
    pub fn preset(name: &str, per_cluster: usize, seed: u64) -> Result<Self> {
        match name {
            "table4" => Ok(Self::table4(per_cluster, seed)),
            other => Err(GcaError::Argument(format!("unknown blob preset '{other}'"))),
        }
    }

    fn check(&self) -> Result<usize> {
        if self.means.is_empty() || self.means.len() != self.sds.len() {
            return Err(GcaError::Argument(
                "blob spec needs one SD row per mean row".into(),
            ));
        }
        let dims = self.means[0].len();
        for (m, s) in self.means.iter().zip(&self.sds) {
            if m.len() != dims || s.len() != dims {
                return Err(GcaError::DimensionMismatch {
                    expected: dims,
                    found: m.len().min(s.len()),
                });
            }
            if m.iter().any(|x| !x.is_finite()) || s.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(GcaError::Argument(
                    "blob means must be finite and SDs positive".into(),
                ));
            }
        }
        Ok(dims)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Blobs {
    pub table: FeatureTable,
    /// Generating cluster of each row.
    pub labels: Vec<usize>,
}

/// Samples `per_cluster` rows per cluster, cluster by cluster.
pub fn gen_blobs(spec: &BlobSpec) -> Result<Blobs> {
    let dims = spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::with_capacity(spec.means.len() * spec.per_cluster);
    let mut labels = Vec::with_capacity(rows.capacity());
    for (j, (mean, sd)) in spec.means.iter().zip(&spec.sds).enumerate() {
        let dists: Vec<Normal<f64>> = mean
            .iter()
            .zip(sd)
            .map(|(&m, &s)| Normal::new(m, s).expect("checked SD"))
            .collect();
        for _ in 0..spec.per_cluster {
            rows.push(dists.iter().map(|d| d.sample(&mut rng)).collect());
            labels.push(j);
        }
    }
    let columns = if dims == FEATURE_NAMES.len() {
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        (0..dims).map(|i| format!("x{i}")).collect()
    };
    Ok(Blobs {
        table: FeatureTable::new(columns, rows)?,
        labels,
    })
}

/// How a scripted turn relates to earlier turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Behavior {
    /// Fresh words never used before.
    NewTopic,
    /// Verbatim copy of the previous turn.
    EchoPrevious,
    /// Verbatim copy of the speaker's own last turn.
    EchoSelf,
    /// A single out-of-vocabulary word.
    SilentWord,
}

impl FromStr for Behavior {
    type Err = GcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "new-topic" => Ok(Behavior::NewTopic),
            "echo-previous" => Ok(Behavior::EchoPrevious),
            "echo-self" => Ok(Behavior::EchoSelf),
            "silent-word" => Ok(Behavior::SilentWord),
            other => Err(GcaError::Argument(format!(
                "unknown behavior tag '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptTurn {
    pub speaker: String,
    pub behavior: Behavior,
}

fn default_words() -> usize {
    4
}

fn default_group() -> String {
    "synthetic".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Script {
    #[serde(default = "default_group")]
    pub group_id: String,
    #[serde(default = "default_words")]
    pub words_per_turn: usize,
    pub turns: Vec<ScriptTurn>,
}

/// The token written for [`Behavior::SilentWord`]; never part of the
/// closed vocabulary.
pub const SILENT_WORD: &str = "silence";

impl Script {
    /// Builds a script from `(speaker, behavior tag)` pairs.
    pub fn from_tags<'a>(
        group_id: &str,
        words_per_turn: usize,
        turns: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self> {
        let turns = turns
            .into_iter()
            .map(|(s, b)| {
                Ok(ScriptTurn {
                    speaker: s.to_string(),
                    behavior: b.parse()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Script {
            group_id: group_id.to_string(),
            words_per_turn,
            turns,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| GcaError::Argument(format!("bad script: {e}")))
    }

    /// The closed vocabulary: four times as many words as the script could
    /// ever draw, so new-topic turns are pairwise disjoint.
    pub fn vocabulary(&self) -> Vec<String> {
        let size = 4 * self.turns.len().max(1) * self.words_per_turn.max(1);
        (0..size).map(|i| format!("w{i:05}")).collect()
    }
}

/// Writes the text of every scripted turn.
pub fn gen_conversation(script: &Script) -> Result<GroupTranscript> {
    if script.words_per_turn == 0 {
        return Err(GcaError::Argument("words_per_turn must be ≥ 1".into()));
    }
    let vocab = script.vocabulary();
    let mut next = 0usize;
    let mut fresh = |n: usize| -> Vec<String> {
        let out = vocab[next..next + n].to_vec();
        next += n;
        out
    };
    let mut texts: Vec<Vec<String>> = Vec::with_capacity(script.turns.len());
    for (t, turn) in script.turns.iter().enumerate() {
        let own_last = script.turns[..t]
            .iter()
            .rposition(|p| p.speaker == turn.speaker)
            .map(|i| texts[i].clone());
        let tokens = match turn.behavior {
            Behavior::NewTopic => fresh(script.words_per_turn),
            Behavior::EchoPrevious => match texts.last() {
                Some(prev) => prev.clone(),
                None => fresh(script.words_per_turn),
            },
            Behavior::EchoSelf => own_last.unwrap_or_else(|| fresh(script.words_per_turn)),
            Behavior::SilentWord => vec![SILENT_WORD.to_string()],
        };
        texts.push(tokens);
    }
    GroupTranscript::from_turns(
        &script.group_id,
        script
            .turns
            .iter()
            .zip(texts)
            .map(|(turn, toks)| (turn.speaker.clone(), toks.join(" "))),
    )
}

/// A space in which every word of `vocabulary` has its own orthogonal unit
/// direction, as LSA yields for a corpus with one document per word.
pub fn closed_space(vocabulary: &[String]) -> Result<SemanticSpace> {
    let mut terms = vocabulary.to_vec();
    terms.sort();
    terms.dedup();
    let n = terms.len();
    if n == 0 {
        return Err(GcaError::EmptyInput("closed vocabulary is empty".into()));
    }
    let svd = Svd {
        u: Matrix::identity(n),
        s: vec![1.0; n],
        v: Matrix::identity(n),
    };
    let mut h = Sha256::new();
    for t in &terms {
        h.update(t.as_bytes());
        h.update([0]);
    }
    SemanticSpace::from_svd(
        &terms,
        &vec![1.0; n],
        &svd,
        Weighting::LogEntropy,
        hex::encode(h.finalize()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{given_new, responsivity_matrix, ProjectedTranscript};
    use crate::semspace::cosine;

    #[test]
    fn table4_blobs_shape_and_determinism() {
        let a = gen_blobs(&BlobSpec::table4(120, 7)).unwrap();
        assert_eq!(a.table.n_rows(), 720);
        assert_eq!(a.table.columns, FEATURE_NAMES.to_vec());
        let b = gen_blobs(&BlobSpec::table4(120, 7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_sd_concentrates() {
        let spec = BlobSpec {
            means: vec![vec![1.0, -2.0]],
            sds: vec![vec![1e-6, 1e-6]],
            per_cluster: 200,
            seed: 1,
        };
        let b = gen_blobs(&spec).unwrap();
        for r in &b.table.rows {
            assert!((r[0] - 1.0).abs() <= 6e-6 && (r[1] + 2.0).abs() <= 6e-6);
        }
        let bad = BlobSpec {
            sds: vec![vec![0.0, 1.0]],
            ..spec
        };
        assert!(gen_blobs(&bad).is_err());
    }

    #[test]
    fn unknown_tag_is_error() {
        assert!(Script::from_tags("g", 3, [("a", "shout")]).is_err());
        assert!(Script::from_json(r#"{"turns":[{"speaker":"a","behavior":"shout"}]}"#).is_err());
        let s = Script::from_json(r#"{"turns":[{"speaker":"a","behavior":"echo-self"}]}"#).unwrap();
        assert_eq!(s.words_per_turn, 4);
    }

    #[test]
    fn all_echo_has_unit_lag_one_cosines() {
        let tags: Vec<(&str, &str)> = (0..10)
            .map(|i| (if i % 2 == 0 { "a" } else { "b" }, "echo-previous"))
            .collect();
        let script = Script::from_tags("g", 3, tags).unwrap();
        let gt = gen_conversation(&script).unwrap();
        let space = closed_space(&script.vocabulary()).unwrap();
        let pt = ProjectedTranscript::new(&gt, &space);
        for t in 1..pt.n() {
            assert!((cosine(&pt.vectors[t - 1], &pt.vectors[t]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_new_topic_is_all_new() {
        let tags: Vec<(&str, &str)> = (0..12)
            .map(|i| (["a", "b", "c"][i % 3], "new-topic"))
            .collect();
        let script = Script::from_tags("g", 4, tags).unwrap();
        let gt = gen_conversation(&script).unwrap();
        let space = closed_space(&script.vocabulary()).unwrap();
        let pt = ProjectedTranscript::new(&gt, &space);
        for s in given_new(&pt.vectors, 1e-10) {
            assert!((s.newness - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn silent_and_echo_self() {
        let script = Script::from_tags(
            "g",
            2,
            [
                ("a", "echo-self"),
                ("b", "new-topic"),
                ("a", "echo-self"),
                ("b", "silent-word"),
            ],
        )
        .unwrap();
        let gt = gen_conversation(&script).unwrap();
        assert_eq!(gt.contributions[0].tokens, gt.contributions[2].tokens);
        assert_eq!(gt.contributions[3].tokens, vec![SILENT_WORD]);
        let space = closed_space(&script.vocabulary()).unwrap();
        assert!(!space.contains(SILENT_WORD));
        let pt = ProjectedTranscript::new(&gt, &space);
        let r = responsivity_matrix(&pt, 2);
        assert!((r.internal_cohesion(0) - 0.5).abs() < 1e-12);
    }
}
