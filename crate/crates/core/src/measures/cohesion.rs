//! Lagged semantic cross-cohesion and the w-spanning responsivity matrix.

use serde::{Deserialize, Serialize};

use super::ProjectedTranscript;
use crate::semspace::cosine;

/// Mean cosine between `initiator`'s contribution at `t − τ` and
/// `respondent`'s contribution at `t`, over all such pairs.
///
/// Returns 0 when no such pair exists. `tau` of 0 is treated like any lag
/// beyond the conversation: there are no pairs.
pub fn cross_cohesion(
    pt: &ProjectedTranscript,
    initiator: usize,
    respondent: usize,
    tau: usize,
) -> f64 {
    let (sum, count) = lagged_pairs(pt, initiator, respondent, tau);
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

fn lagged_pairs(
    pt: &ProjectedTranscript,
    initiator: usize,
    respondent: usize,
    tau: usize,
) -> (f64, usize) {
    let n = pt.n();
    if tau == 0 || tau >= n {
        return (0.0, 0);
    }
    let mut sum = 0.0;
    let mut count = 0;
    for t in tau..n {
        if pt.speakers[t - tau] == initiator && pt.speakers[t] == respondent {
            sum += cosine(&pt.vectors[t - tau], &pt.vectors[t]);
            count += 1;
        }
    }
    (sum, count)
}

/// `k × k` matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    pub k: usize,
    pub data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(k: usize) -> Self {
        SquareMatrix {
            k,
            data: vec![0.0; k * k],
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.k + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.k + col] = v;
    }
}

/// Responsivity across a window of `w` lags.
///
/// Rows are respondents, columns initiators: `get(a, b)` is how strongly
/// `a` responds to `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponsivityMatrix {
    pub window: usize,
    pub matrix: SquareMatrix,
    /// Cross-cohesion matrices `X(τ)` for `τ = 1..=w`, same orientation.
    pub per_lag: Vec<SquareMatrix>,
    /// Number of lagged pairs behind each `X(τ)` entry.
    pub pair_counts: Vec<Vec<usize>>,
}

impl ResponsivityMatrix {
    pub fn k(&self) -> usize {
        self.matrix.k
    }

    pub fn get(&self, respondent: usize, initiator: usize) -> f64 {
        self.matrix.get(respondent, initiator)
    }

    /// Diagonal entry: semantic consistency with one's own recent turns.
    pub fn internal_cohesion(&self, a: usize) -> f64 {
        self.get(a, a)
    }

    /// Mean of row `a` without the diagonal; 0 when `k = 1`.
    pub fn overall_responsivity(&self, a: usize) -> f64 {
        let k = self.k();
        if k < 2 {
            return 0.0;
        }
        (0..k)
            .filter(|&j| j != a)
            .map(|j| self.get(a, j))
            .sum::<f64>()
            / (k - 1) as f64
    }

    /// Mean of column `a` without the diagonal; 0 when `k = 1`.
    pub fn social_impact(&self, a: usize) -> f64 {
        let k = self.k();
        if k < 2 {
            return 0.0;
        }
        (0..k)
            .filter(|&j| j != a)
            .map(|j| self.get(j, a))
            .sum::<f64>()
            / (k - 1) as f64
    }

    /// Whether `a` has at least one own lagged pair within the window.
    pub fn has_self_pairs(&self, a: usize) -> bool {
        self.pair_counts
            .iter()
            .any(|counts| counts[a * self.k() + a] > 0)
    }
}

/// `R(w) = (1/w) Σ_{τ=1..w} X(τ)`; lags past the end contribute zeros.
pub fn responsivity_matrix(pt: &ProjectedTranscript, window: usize) -> ResponsivityMatrix {
    let k = pt.k();
    let n = pt.n();
    let mut total = SquareMatrix::zeros(k);
    let mut per_lag = Vec::with_capacity(window);
    let mut pair_counts = Vec::with_capacity(window);
    for tau in 1..=window {
        let mut sums = SquareMatrix::zeros(k);
        let mut counts = vec![0usize; k * k];
        if tau < n {
            for t in tau..n {
                let init = pt.speakers[t - tau];
                let resp = pt.speakers[t];
                let c = cosine(&pt.vectors[t - tau], &pt.vectors[t]);
                sums.data[resp * k + init] += c;
                counts[resp * k + init] += 1;
            }
        }
        for (s, &c) in sums.data.iter_mut().zip(&counts) {
            if c > 0 {
                *s /= c as f64;
            }
        }
        for (acc, x) in total.data.iter_mut().zip(&sums.data) {
            *acc += x;
        }
        per_lag.push(sums);
        pair_counts.push(counts);
    }
    if window > 0 {
        total.data.iter_mut().for_each(|x| *x /= window as f64);
    }
    ResponsivityMatrix {
        window,
        matrix: total,
        per_lag,
        pair_counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(speakers: &[usize], vectors: Vec<Vec<f64>>) -> ProjectedTranscript {
        let k = speakers.iter().max().map_or(0, |m| m + 1);
        ProjectedTranscript::from_parts(
            (0..k).map(|i| format!("p{i}")).collect(),
            speakers.to_vec(),
            vectors,
            vec![1; speakers.len()],
        )
        .unwrap()
    }

    #[test]
    fn identical_vectors_alternating() {
        let speakers: Vec<usize> = (0..10).map(|i| i % 2).collect();
        let p = pt(&speakers, vec![vec![1.0, 2.0]; 10]);
        assert!((cross_cohesion(&p, 0, 1, 1) - 1.0).abs() < 1e-12);
        // b never follows a at lag 2 in strict alternation
        assert_eq!(cross_cohesion(&p, 0, 1, 2), 0.0);
    }

    #[test]
    fn hand_computed_mean_of_cosines() {
        // turns: A e1, B e1+e2, A e2, B e1, A e1+e2, B e2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = vec![
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ];
        let p = pt(&[0, 1, 0, 1, 0, 1], v);
        // A→B lag 1: (1,2),(3,4),(5,6): cos = s, 0, s
        assert!((cross_cohesion(&p, 0, 1, 1) - 2.0 * s / 3.0).abs() < 1e-12);
        // B→A lag 1: (2,3),(4,5): s, s
        assert!((cross_cohesion(&p, 1, 0, 1) - s).abs() < 1e-12);
        // A→A lag 2: (1,3),(3,5): 0, s
        assert!((cross_cohesion(&p, 0, 0, 2) - s / 2.0).abs() < 1e-12);
        let r = responsivity_matrix(&p, 2);
        assert!((r.get(1, 0) - (2.0 * s / 3.0) / 2.0).abs() < 1e-12);
        assert!((r.internal_cohesion(0) - (s / 2.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn all_ones_when_every_pair_present() {
        // Every ordered pair of {0,1,2} appears at lags 1 and 2.
        let mut state = 7u64;
        let speakers: Vec<usize> = (0..60)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 33) % 3) as usize
            })
            .collect();
        let p = pt(&speakers, vec![vec![0.3, 0.4]; speakers.len()]);
        let r = responsivity_matrix(&p, 2);
        assert!(r.pair_counts.iter().flatten().all(|&c| c > 0));
        for &x in &r.matrix.data {
            assert!((x - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_turn_is_zero() {
        let p = pt(&[0], vec![vec![1.0]]);
        let r = responsivity_matrix(&p, 20);
        assert_eq!(r.matrix.data, vec![0.0]);
        assert_eq!(r.per_lag.len(), 20);
    }

    #[test]
    fn row_and_column_means() {
        let mut r = responsivity_matrix(&pt(&[0, 1, 2], vec![vec![1.0]; 3]), 1);
        r.matrix.data = vec![0.9, 0.2, 0.4, 0.0, 0.0, 0.0, 0.6, 0.0, 0.0];
        assert!((r.overall_responsivity(0) - 0.3).abs() < 1e-15);
        assert!((r.social_impact(0) - 0.3).abs() < 1e-15);
    }
}
