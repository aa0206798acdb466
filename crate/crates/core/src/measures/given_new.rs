//! Given/new decomposition of each contribution against the span of all
//! earlier contributions in the same group.

use crate::linalg::{axpy, dot, norm};

/// Default residual tolerance, relative to the contribution's own norm.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// Split of one document vector into its given and new parts.
#[derive(Debug, Clone, PartialEq)]
pub struct GivenNewSplit {
    pub given: Vec<f64>,
    pub new: Vec<f64>,
    /// `‖new‖ / (‖new‖ + ‖given‖)`, 0 for a zero vector.
    pub newness: f64,
}

/// Orthonormal basis of the conversation so far, grown by modified
/// Gram–Schmidt.
#[derive(Debug, Clone)]
pub struct GivenSubspace {
    dims: usize,
    epsilon: f64,
    basis: Vec<Vec<f64>>,
}

impl GivenSubspace {
    pub fn new(dims: usize, epsilon: f64) -> Self {
        GivenSubspace {
            dims,
            epsilon,
            basis: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Decomposes `d` against the current basis without changing it.
    ///
    /// `given + new` reproduces `d` exactly up to rounding.
    pub fn split(&self, d: &[f64]) -> GivenNewSplit {
        let mut residual = d.to_vec();
        let mut given = vec![0.0; d.len()];
        // Two MGS passes keep the residual orthogonal to working precision.
        for _ in 0..2 {
            for q in &self.basis {
                let c = dot(q, &residual);
                axpy(-c, q, &mut residual);
                axpy(c, q, &mut given);
            }
        }
        // A residual below ε·‖d‖ is rounding noise with no meaningful
        // direction; it is counted as given so the parts stay orthogonal.
        if norm(&residual) <= self.epsilon * norm(d) {
            for (g, r) in given.iter_mut().zip(residual.iter_mut()) {
                *g += *r;
                *r = 0.0;
            }
        }
        let ng = norm(&given);
        let nn = norm(&residual);
        let newness = if ng + nn == 0.0 { 0.0 } else { nn / (nn + ng) };
        GivenNewSplit {
            given,
            new: residual,
            newness,
        }
    }

    /// Decomposes `d`, then extends the basis with its new direction when
    /// the residual is large enough and the basis is not yet full.
    pub fn observe(&mut self, d: &[f64]) -> GivenNewSplit {
        let split = self.split(d);
        let nn = norm(&split.new);
        let nd = norm(d);
        if nd > 0.0 && nn > self.epsilon * nd && self.basis.len() < self.dims {
            self.basis.push(split.new.iter().map(|x| x / nn).collect());
        }
        split
    }
}

/// Newness score of every contribution, in order.
pub fn given_new(vectors: &[Vec<f64>], epsilon: f64) -> Vec<GivenNewSplit> {
    let dims = vectors.first().map_or(0, Vec::len);
    let mut subspace = GivenSubspace::new(dims, epsilon);
    vectors.iter().map(|d| subspace.observe(d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_contribution_is_all_new() {
        let out = given_new(&[vec![0.3, -1.2, 0.0]], DEFAULT_EPSILON);
        assert_eq!(out[0].newness, 1.0);
    }

    #[test]
    fn repeat_is_all_given() {
        let a = vec![0.3, -1.2, 0.7];
        let b = vec![1.0, 0.1, 0.0];
        let out = given_new(&[a.clone(), b, a], DEFAULT_EPSILON);
        assert!(out[2].newness <= 1e-9);
    }

    #[test]
    fn orthonormal_half_new() {
        let out = given_new(&[vec![1.0, 0.0], vec![1.0, 1.0]], DEFAULT_EPSILON);
        let s = &out[1];
        assert!((s.given[0] - 1.0).abs() < 1e-15 && s.given[1].abs() < 1e-15);
        assert!(s.new[0].abs() < 1e-15 && (s.new[1] - 1.0).abs() < 1e-15);
        assert!((s.newness - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_vector_scores_zero_and_does_not_extend() {
        let mut g = GivenSubspace::new(3, DEFAULT_EPSILON);
        let s = g.observe(&[0.0, 0.0, 0.0]);
        assert_eq!(s.newness, 0.0);
        assert_eq!(g.rank(), 0);
        assert_eq!(g.observe(&[0.0, 2.0, 0.0]).newness, 1.0);
    }

    #[test]
    fn basis_is_capped_at_dimension() {
        let mut g = GivenSubspace::new(2, DEFAULT_EPSILON);
        for v in [[1.0, 0.2], [0.1, 1.0], [0.5, 0.5], [-1.0, 3.0]] {
            g.observe(&v);
        }
        assert_eq!(g.rank(), 2);
    }
}
