//! Per-participant GCA measures.
//!
//! A group transcript is first projected into a [`SemanticSpace`]; every
//! measure is then computed from the speaker sequence and the document
//! vectors.

mod cohesion;
mod given_new;
mod participation;
mod window;

pub use cohesion::{cross_cohesion, responsivity_matrix, ResponsivityMatrix, SquareMatrix};
pub use given_new::{given_new, GivenNewSplit, GivenSubspace, DEFAULT_EPSILON};
pub use participation::{cross_correlation, participation_series, ParticipationSeries};
pub use window::{calibrate_window, min_self_gaps, DEFAULT_COVERAGE};

use serde::{Deserialize, Serialize};

use crate::corpus::{Contribution, GroupTranscript};
use crate::error::{GcaError, Result};
use crate::linalg::norm;
use crate::semspace::SemanticSpace;

/// Window used when none is configured.
pub const DEFAULT_WINDOW: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub window: usize,
    /// Internal cohesion assigned to participants without an own pair of
    /// turns inside the window.
    pub internal_cohesion_fallback: f64,
    pub epsilon: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            window: DEFAULT_WINDOW,
            internal_cohesion_fallback: 0.0,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// Speaker sequence plus document vectors of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedTranscript {
    pub group_id: String,
    pub participants: Vec<String>,
    /// Speaker index per turn.
    pub speakers: Vec<usize>,
    pub vectors: Vec<Vec<f64>>,
    pub word_counts: Vec<usize>,
}

impl ProjectedTranscript {
    pub fn new(gt: &GroupTranscript, space: &SemanticSpace) -> Self {
        ProjectedTranscript {
            group_id: gt.group_id.clone(),
            participants: gt.participants.clone(),
            speakers: gt.speakers(),
            vectors: gt
                .contributions
                .iter()
                .map(|c| space.project(&c.tokens))
                .collect(),
            word_counts: gt
                .contributions
                .iter()
                .map(Contribution::word_count)
                .collect(),
        }
    }

    /// Assembles a transcript from precomputed vectors.
    pub fn from_parts(
        participants: Vec<String>,
        speakers: Vec<usize>,
        vectors: Vec<Vec<f64>>,
        word_counts: Vec<usize>,
    ) -> Result<Self> {
        let n = speakers.len();
        if vectors.len() != n || word_counts.len() != n {
            return Err(GcaError::DimensionMismatch {
                expected: n,
                found: vectors.len().min(word_counts.len()),
            });
        }
        if let Some(&bad) = speakers.iter().find(|&&s| s >= participants.len()) {
            return Err(GcaError::Argument(format!(
                "speaker index {bad} outside {} participants",
                participants.len()
            )));
        }
        Ok(ProjectedTranscript {
            group_id: String::new(),
            participants,
            speakers,
            vectors,
            word_counts,
        })
    }

    pub fn n(&self) -> usize {
        self.speakers.len()
    }

    pub fn k(&self) -> usize {
        self.participants.len()
    }
}

/// Semantic content per word; 0 for empty contributions.
pub fn communication_density(vector: &[f64], word_count: usize) -> f64 {
    if word_count == 0 {
        0.0
    } else {
        norm(vector) / word_count as f64
    }
}

/// Conditions under which a profile value is a convention rather than a
/// measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileFlag {
    /// The group has a single participant; responsivity and impact are 0.
    SingleParticipant,
    /// No two own turns inside the window; internal cohesion set to fallback.
    CohesionFallback,
}

impl ProfileFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileFlag::SingleParticipant => "single_participant",
            ProfileFlag::CohesionFallback => "cohesion_fallback",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "single_participant" => Some(ProfileFlag::SingleParticipant),
            "cohesion_fallback" => Some(ProfileFlag::CohesionFallback),
            _ => None,
        }
    }
}

/// The six GCA scores of one participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcaProfile {
    pub group_id: String,
    pub participant_id: String,
    pub participation: f64,
    pub social_impact: f64,
    pub overall_responsivity: f64,
    pub internal_cohesion: f64,
    pub newness: f64,
    pub density: f64,
    pub n_contributions: usize,
    pub flags: Vec<ProfileFlag>,
}

impl GcaProfile {
    /// Features in canonical clustering order.
    pub fn features(&self) -> [f64; 6] {
        [
            self.participation,
            self.social_impact,
            self.overall_responsivity,
            self.internal_cohesion,
            self.newness,
            self.density,
        ]
    }
}

/// Profiles for every participant of a projected group.
pub fn profile_projected(
    pt: &ProjectedTranscript,
    cfg: &AnalysisConfig,
) -> Result<Vec<GcaProfile>> {
    if cfg.window == 0 {
        return Err(GcaError::Argument("window must be ≥ 1".into()));
    }
    if pt.n() == 0 {
        return Err(GcaError::EmptyInput(format!(
            "group {} has no contributions",
            pt.group_id
        )));
    }
    let k = pt.k();
    let n = pt.n() as f64;
    let r = responsivity_matrix(pt, cfg.window);
    let newness = given_new(&pt.vectors, cfg.epsilon);

    let mut counts = vec![0usize; k];
    let mut newness_sum = vec![0.0; k];
    let mut density_sum = vec![0.0; k];
    for (t, &a) in pt.speakers.iter().enumerate() {
        counts[a] += 1;
        newness_sum[a] += newness[t].newness;
        density_sum[a] += communication_density(&pt.vectors[t], pt.word_counts[t]);
    }

    Ok((0..k)
        .map(|a| {
            let mut flags = Vec::new();
            if k == 1 {
                flags.push(ProfileFlag::SingleParticipant);
            }
            let internal_cohesion = if r.has_self_pairs(a) {
                r.internal_cohesion(a)
            } else {
                flags.push(ProfileFlag::CohesionFallback);
                cfg.internal_cohesion_fallback
            };
            let c = counts[a].max(1) as f64;
            GcaProfile {
                group_id: pt.group_id.clone(),
                participant_id: pt.participants[a].clone(),
                participation: counts[a] as f64 / n - 1.0 / k as f64,
                social_impact: r.social_impact(a),
                overall_responsivity: r.overall_responsivity(a),
                internal_cohesion,
                newness: newness_sum[a] / c,
                density: density_sum[a] / c,
                n_contributions: counts[a],
                flags,
            }
        })
        .collect())
}

/// Projects `gt` into `space` and computes every participant's profile.
pub fn profile(
    gt: &GroupTranscript,
    space: &SemanticSpace,
    cfg: &AnalysisConfig,
) -> Result<Vec<GcaProfile>> {
    profile_projected(&ProjectedTranscript::new(gt, space), cfg)
}

/// Profiles for many groups, in input order.
pub fn profile_all(
    groups: &[GroupTranscript],
    space: &SemanticSpace,
    cfg: &AnalysisConfig,
) -> Result<Vec<GcaProfile>> {
    use rayon::prelude::*;
    let per_group: Vec<Vec<GcaProfile>> = groups
        .par_iter()
        .map(|g| profile(g, space, cfg))
        .collect::<Result<_>>()?;
    Ok(per_group.into_iter().flatten().collect())
}
