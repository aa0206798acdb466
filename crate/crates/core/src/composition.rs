//! Group-level descriptors built from role assignments.

use std::collections::{BTreeMap, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{GcaError, Result};
use crate::roles::RoleLabel;

/// Role names used as the default label set, archetypes first.
pub fn default_label_set() -> Vec<String> {
    RoleLabel::ROLES
        .iter()
        .chain(std::iter::once(&RoleLabel::Unlabeled))
        .map(|r| r.as_str().to_string())
        .collect()
}

/// Share of members per role. Every label in `label_set` is reported, with
/// labels outside the set appended in sorted order.
pub fn proportions<S: AsRef<str>>(
    roles: &[S],
    label_set: &[String],
) -> Result<IndexMap<String, f64>> {
    if roles.is_empty() {
        return Err(GcaError::EmptyInput("group has no members".into()));
    }
    let counts = role_counts(roles, label_set);
    let n = roles.len() as f64;
    Ok(counts.into_iter().map(|(r, c)| (r, c as f64 / n)).collect())
}

fn role_counts<S: AsRef<str>>(roles: &[S], label_set: &[String]) -> IndexMap<String, usize> {
    let mut counts: IndexMap<String, usize> = label_set.iter().map(|l| (l.clone(), 0)).collect();
    let mut extra: BTreeMap<String, usize> = BTreeMap::new();
    for r in roles {
        match counts.get_mut(r.as_ref()) {
            Some(c) => *c += 1,
            None => *extra.entry(r.as_ref().to_string()).or_default() += 1,
        }
    }
    counts.extend(extra);
    counts
}

/// Role-diversity entropy with the natural logarithm.
pub fn diversity(proportions: &[f64]) -> f64 {
    diversity_base(proportions, std::f64::consts::E)
}

/// Entropy in the given log base; zero proportions contribute nothing.
pub fn diversity_base(proportions: &[f64], base: f64) -> f64 {
    let h: f64 = proportions
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        / base.ln();
    h.max(0.0)
}

/// Normalized learning gain `(post − pre) / (100 − pre)`; may be negative.
pub fn learning_gain(pre_pct: f64, post_pct: f64) -> Result<f64> {
    for (name, v) in [("pre", pre_pct), ("post", post_pct)] {
        if !(0.0..=100.0).contains(&v) {
            return Err(GcaError::Argument(format!(
                "{name} score {v} outside [0, 100]"
            )));
        }
    }
    if pre_pct == 100.0 {
        return Err(GcaError::Argument(
            "learning gain undefined for a pre score of 100".into(),
        ));
    }
    Ok((post_pct - pre_pct) / (100.0 - pre_pct))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleAssignment {
    pub group_id: String,
    pub participant_id: String,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuizScore {
    pub participant_id: String,
    pub pre_pct: f64,
    pub post_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRelevanceScore {
    pub group_id: String,
    pub relevance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComposition {
    pub group_id: String,
    pub size: usize,
    pub counts: IndexMap<String, usize>,
    pub proportions: IndexMap<String, f64>,
    pub diversity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic_relevance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_learning_gain: Option<f64>,
    /// Members with a usable quiz record.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_gains: Option<usize>,
}

/// One record per group (first-appearance order) joining roles, topic
/// relevance and learning gains. Missing inputs leave fields absent.
///
/// Members whose pre score is 100 have no defined gain and are skipped.
pub fn group_report(
    assignments: &[RoleAssignment],
    relevance: &[GroupRelevanceScore],
    quiz: &[QuizScore],
    label_set: &[String],
) -> Result<Vec<GroupComposition>> {
    let mut seen = HashSet::new();
    for a in assignments {
        if !seen.insert((&a.group_id, &a.participant_id)) {
            return Err(GcaError::Join(format!(
                "participant {} appears twice in group {}",
                a.participant_id, a.group_id
            )));
        }
    }
    let mut rel: BTreeMap<&str, f64> = BTreeMap::new();
    for r in relevance {
        if rel.insert(&r.group_id, r.relevance).is_some() {
            return Err(GcaError::Join(format!(
                "group {} has two relevance rows",
                r.group_id
            )));
        }
    }
    let mut scores: BTreeMap<&str, &QuizScore> = BTreeMap::new();
    for q in quiz {
        if scores.insert(&q.participant_id, q).is_some() {
            return Err(GcaError::Join(format!(
                "participant {} has two quiz rows",
                q.participant_id
            )));
        }
    }

    let mut groups: IndexMap<&str, Vec<&RoleAssignment>> = IndexMap::new();
    for a in assignments {
        groups.entry(&a.group_id).or_default().push(a);
    }
    groups
        .into_iter()
        .map(|(gid, members)| {
            let roles: Vec<&str> = members.iter().map(|m| m.role.as_str()).collect();
            let props = proportions(&roles, label_set)?;
            let p: Vec<f64> = props.values().copied().collect();
            let mut gains = Vec::new();
            for m in &members {
                if let Some(q) = scores.get(m.participant_id.as_str()) {
                    if q.pre_pct == 100.0 {
                        log::warn!(
                            "participant {}: pre score 100, gain skipped",
                            q.participant_id
                        );
                        continue;
                    }
                    gains.push(learning_gain(q.pre_pct, q.post_pct)?);
                }
            }
            let (mean_learning_gain, n_gains) = if gains.is_empty() {
                (None, None)
            } else {
                (
                    Some(gains.iter().sum::<f64>() / gains.len() as f64),
                    Some(gains.len()),
                )
            };
            Ok(GroupComposition {
                group_id: gid.to_string(),
                size: members.len(),
                counts: role_counts(&roles, label_set),
                diversity: diversity(&p),
                proportions: props,
                topic_relevance: rel.get(gid).copied(),
                mean_learning_gain,
                n_gains,
            })
        })
        .collect()
}
