//! Choice of the responsivity window.

use std::collections::HashMap;

use crate::corpus::GroupTranscript;
use crate::error::{GcaError, Result};

/// Share of participants that must have a pair of own turns inside the
/// window.
pub const DEFAULT_COVERAGE: f64 = 0.95;

/// Smallest gap (in turns) between two consecutive contributions of each
/// participant; `None` for participants who spoke once.
pub fn min_self_gaps(gt: &GroupTranscript) -> Vec<Option<usize>> {
    let mut last: HashMap<usize, usize> = HashMap::new();
    let mut gaps: Vec<Option<usize>> = vec![None; gt.k()];
    for (t, a) in gt.speakers().into_iter().enumerate() {
        if let Some(prev) = last.insert(a, t) {
            let gap = t - prev;
            gaps[a] = Some(gaps[a].map_or(gap, |g: usize| g.min(gap)));
        }
    }
    gaps
}

/// Smallest `w` such that at least `coverage` of all participants (pooled
/// over the transcripts) have two own contributions at most `w` turns apart,
/// which is exactly when their internal cohesion is defined.
///
/// Falls back to the longest transcript length when no shorter window
/// reaches the target.
pub fn calibrate_window(datasets: &[GroupTranscript], coverage: f64) -> Result<usize> {
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(GcaError::Argument(format!(
            "coverage {coverage} outside (0, 1]"
        )));
    }
    if datasets.is_empty() {
        return Err(GcaError::EmptyInput(
            "no transcripts to calibrate on".into(),
        ));
    }
    let gaps: Vec<Option<usize>> = datasets.iter().flat_map(min_self_gaps).collect();
    let total = gaps.len() as f64;
    let longest = datasets.iter().map(GroupTranscript::n).max().unwrap_or(1);
    for w in 1..longest {
        let covered = gaps.iter().filter(|g| g.is_some_and(|g| g <= w)).count();
        if covered as f64 >= coverage * total - 1e-12 {
            return Ok(w);
        }
    }
    Ok(longest.max(1))
}
