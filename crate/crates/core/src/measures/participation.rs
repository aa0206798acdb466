//! Participation series and their lagged cross-correlation.

use crate::corpus::GroupTranscript;
use crate::error::{GcaError, Result};

/// Binary participation series for every participant of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticipationSeries {
    pub participants: Vec<String>,
    /// `series[a][t]` is 1 when participant `a` made contribution `t + 1`.
    pub series: Vec<Vec<u8>>,
    pub counts: Vec<usize>,
    /// Mean participation `‖P_a‖ / n`.
    pub mean: Vec<f64>,
    /// Sample variance with `n − 1` denominator; 0 when `n = 1`.
    pub variance: Vec<f64>,
    /// Group-relative mean participation `p̄_a − 1/k`.
    pub relative: Vec<f64>,
}

impl ParticipationSeries {
    pub fn n(&self) -> usize {
        self.series.first().map_or(0, Vec::len)
    }

    pub fn k(&self) -> usize {
        self.participants.len()
    }

    /// Sum of the participation matrix column at 0-based turn `t`.
    pub fn column_sum(&self, t: usize) -> u32 {
        self.series.iter().map(|s| u32::from(s[t])).sum()
    }
}

pub fn participation_series(gt: &GroupTranscript) -> ParticipationSeries {
    let n = gt.n();
    let k = gt.k();
    let mut series = vec![vec![0u8; n]; k];
    for (t, &a) in gt.speakers().iter().enumerate() {
        series[a][t] = 1;
    }
    let counts: Vec<usize> = series
        .iter()
        .map(|s| s.iter().map(|&x| usize::from(x)).sum())
        .collect();
    let nf = n as f64;
    let mean: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
    let variance = series
        .iter()
        .zip(&mean)
        .map(|(s, &m)| {
            if n < 2 {
                return 0.0;
            }
            s.iter().map(|&x| (f64::from(x) - m).powi(2)).sum::<f64>() / (nf - 1.0)
        })
        .collect();
    let relative = mean.iter().map(|m| m - 1.0 / k as f64).collect();
    ParticipationSeries {
        participants: gt.participants.clone(),
        series,
        counts,
        mean,
        variance,
        relative,
    }
}

/// Pearson correlation of `p_a(t)` with `p_b(t − τ)` over `t = τ+1..n`.
///
/// Returns 0 when either lagged segment has zero variance.
pub fn cross_correlation(ps: &ParticipationSeries, a: usize, b: usize, tau: usize) -> Result<f64> {
    let n = ps.n();
    if a >= ps.k() || b >= ps.k() {
        return Err(GcaError::Argument(format!(
            "participant index out of range (k = {})",
            ps.k()
        )));
    }
    if n == 0 || tau > n - 1 {
        return Err(GcaError::Argument(format!(
            "lag {tau} outside 0..={}",
            n.saturating_sub(1)
        )));
    }
    let x: Vec<f64> = ps.series[a][tau..].iter().map(|&v| f64::from(v)).collect();
    let y: Vec<f64> = ps.series[b][..n - tau]
        .iter()
        .map(|&v| f64::from(v))
        .collect();
    Ok(pearson(&x, &y))
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx).powi(2);
        syy += (yi - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transcript(speakers: &[&str]) -> GroupTranscript {
        GroupTranscript::from_turns("g", speakers.iter().map(|s| (*s, "x"))).unwrap()
    }

    #[test]
    fn equal_participation_is_zero() {
        let speakers: Vec<&str> = (0..40).map(|i| ["a", "b", "c", "d"][i % 4]).collect();
        let ps = participation_series(&transcript(&speakers));
        for r in &ps.relative {
            assert!(r.abs() < 1e-15);
        }
    }

    #[test]
    fn dominant_speaker() {
        let mut speakers = vec!["a"; 20];
        speakers.extend(["b", "c", "d"].iter().cycle().take(20));
        let ps = participation_series(&transcript(&speakers));
        assert!((ps.relative[0] - 0.25).abs() < 1e-15);
        assert!(ps.relative.iter().sum::<f64>().abs() < 1e-12);
        assert!((0..40).all(|t| ps.column_sum(t) == 1));
    }

    #[test]
    fn variance_definition() {
        let ps = participation_series(&transcript(&["a", "b", "a", "a"]));
        // p_a = 1,0,1,1; mean .75; var = (3·.0625 + .5625)/3
        assert!((ps.variance[0] - 0.25).abs() < 1e-15);
        let single = participation_series(&transcript(&["a"]));
        assert_eq!(single.variance, vec![0.0]);
    }

    #[test]
    fn alternation_cross_correlation() {
        let speakers: Vec<&str> = (0..40)
            .map(|i| if i % 2 == 0 { "a" } else { "b" })
            .collect();
        let ps = participation_series(&transcript(&speakers));
        let rho_ba = cross_correlation(&ps, 1, 0, 1).unwrap();
        assert!((rho_ba - 1.0).abs() < 1e-12);
        assert!((cross_correlation(&ps, 0, 0, 1).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn silent_and_self_correlation() {
        let ps = participation_series(&transcript(&["a", "b", "b", "a", "b"]));
        assert!((cross_correlation(&ps, 0, 0, 0).unwrap() - 1.0).abs() < 1e-12);
        let mut ps2 = ps.clone();
        ps2.participants.push("silent".into());
        ps2.series.push(vec![0; 5]);
        assert_eq!(cross_correlation(&ps2, 2, 0, 1).unwrap(), 0.0);
        assert!(cross_correlation(&ps, 0, 1, 5).is_err());
    }
}
