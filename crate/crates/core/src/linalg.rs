//! Small dense/sparse linear algebra used by the semantic space and the
//! given-new decomposition.
//!
//! The SVD is a thin QR followed by one-sided (Hestenes) Jacobi on the
//! triangular factor. Large inputs first go through a randomized range
//! finder with power iterations so only an `l × l` problem reaches Jacobi.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{GcaError, Result};

const JACOBI_MAX_SWEEPS: usize = 80;
const JACOBI_TOL: f64 = 1e-15;
const RANGE_FINDER_SEED: u64 = 0x006c_7361_5f73_7664;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(GcaError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(GcaError::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(GcaError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a != 0.0 {
                    axpy(a, other.row(k), out_row);
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius(&self) -> f64 {
        norm(&self.data)
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from per-row `(column, value)` lists. Columns within a row must
    /// be distinct.
    pub fn from_row_entries(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut r in rows.iter().cloned() {
            r.sort_by_key(|e| e.0);
            for (c, v) in r {
                debug_assert!(c < cols);
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix {
            rows: rows.len(),
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(m: &Matrix) -> Self {
        let rows = (0..m.rows())
            .map(|r| {
                m.row(r)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(c, v)| (c, *v))
                    .collect()
            })
            .collect();
        SparseMatrix::from_row_entries(m.cols(), rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|(cc, _)| *cc == c).map_or(0.0, |e| e.1)
    }

    /// Applies `f(row, value)` to every stored entry.
    pub fn map_values(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> SparseMatrix {
        let mut out = self.clone();
        for r in 0..self.rows {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                out.values[i] = f(r, self.col_idx[i], self.values[i]);
            }
        }
        out
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                m.set(r, c, v);
            }
        }
        m
    }

    /// `self · x`
    pub fn mul_dense(&self, x: &Matrix) -> Matrix {
        assert_eq!(self.cols, x.rows(), "sparse × dense shape mismatch");
        let mut out = Matrix::zeros(self.rows, x.cols());
        for r in 0..self.rows {
            let out_row = out.row_mut(r);
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                axpy(self.values[i], x.row(self.col_idx[i]), out_row);
            }
        }
        out
    }

    /// `selfᵀ · y`
    pub fn t_mul_dense(&self, y: &Matrix) -> Matrix {
        assert_eq!(self.rows, y.rows(), "sparseᵀ × dense shape mismatch");
        let mut out = Matrix::zeros(self.cols, y.cols());
        for r in 0..self.rows {
            let yr = y.row(r);
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                axpy(self.values[i], yr, out.row_mut(self.col_idx[i]));
            }
        }
        out
    }
}

/// Thin SVD factors: `a ≈ u · diag(s) · vᵀ`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `m × r`
    pub u: Matrix,
    pub s: Vec<f64>,
    /// `n × r`
    pub v: Matrix,
}

impl Svd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for r in 0..us.rows() {
            for (c, s) in self.s.iter().enumerate() {
                let v = us.get(r, c) * s;
                us.set(r, c, v);
            }
        }
        us.matmul(&self.v.transpose())
            .expect("svd factors have matching shapes")
    }

    fn truncate(mut self, d: usize, rel_tol: f64) -> Svd {
        let top = self.s.first().copied().unwrap_or(0.0);
        let keep = self
            .s
            .iter()
            .take(d)
            .take_while(|&&s| s > top * rel_tol && s > f64::MIN_POSITIVE)
            .count();
        self.u = take_columns(&self.u, keep);
        self.v = take_columns(&self.v, keep);
        self.s.truncate(keep);
        self
    }
}

fn take_columns(m: &Matrix, k: usize) -> Matrix {
    let mut out = Matrix::zeros(m.rows(), k);
    for r in 0..m.rows() {
        out.row_mut(r).copy_from_slice(&m.row(r)[..k]);
    }
    out
}

/// Column-wise modified Gram–Schmidt with one re-orthogonalization pass.
///
/// Returns `(q, r)` with `a = q · r`; columns that are numerically dependent
/// on earlier ones come back as zero columns of `q` with a zero row in `r`.
pub fn qr_mgs(a: &Matrix) -> (Matrix, Matrix) {
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<f64>> = (0..n).map(|c| a.column(c)).collect();
    let mut r = Matrix::zeros(n, n);
    let scale = a.frobenius().max(f64::MIN_POSITIVE);
    for j in 0..n {
        let (done, rest) = cols.split_at_mut(j);
        let v = &mut rest[0];
        for _ in 0..2 {
            for (i, qi) in done.iter().enumerate() {
                let proj = dot(qi, v);
                axpy(-proj, qi, v);
                r.set(i, j, r.get(i, j) + proj);
            }
        }
        let nv = norm(v);
        if nv > 1e-13 * scale {
            v.iter_mut().for_each(|x| *x /= nv);
            r.set(j, j, nv);
        } else {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
    }
    let mut q = Matrix::zeros(m, n);
    for (c, col) in cols.iter().enumerate() {
        for (row, v) in col.iter().enumerate() {
            q.set(row, c, *v);
        }
    }
    (q, r)
}

/// One-sided Jacobi on a square matrix: returns `(u, s, v)` with
/// `a = u · diag(s) · vᵀ`, unsorted.
fn hestenes(a: &Matrix) -> Result<(Matrix, Vec<f64>, Matrix)> {
    let n = a.cols();
    let mut w: Vec<Vec<f64>> = (0..n).map(|c| a.column(c)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|c| {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            e
        })
        .collect();
    let mut converged = n < 2;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        sweeps += 1;
        converged = true;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
    }
    if !converged {
        return Err(GcaError::Numeric(format!(
            "one-sided Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (n = {n})"
        )));
    }
    let s: Vec<f64> = w.iter().map(|c| norm(c)).collect();
    let mut u = Matrix::zeros(a.rows(), n);
    let mut vm = Matrix::zeros(n, n);
    for c in 0..n {
        if s[c] > 0.0 {
            for (r, x) in w[c].iter().enumerate() {
                u.set(r, c, x / s[c]);
            }
        }
        for (r, x) in v[c].iter().enumerate() {
            vm.set(r, c, *x);
        }
    }
    Ok((u, s, vm))
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let a = *xp;
        let b = *xq;
        *xp = c * a - s * b;
        *xq = s * a + c * b;
    }
}

/// Full thin SVD of a dense matrix, singular values sorted descending.
pub fn svd_dense(a: &Matrix) -> Result<Svd> {
    if a.rows() < a.cols() {
        let t = svd_dense(&a.transpose())?;
        return Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    let (q, r) = qr_mgs(a);
    let (ur, s, vr) = hestenes(&r)?;
    let u = q.matmul(&ur)?;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));
    let mut us = Matrix::zeros(u.rows(), order.len());
    let mut vs = Matrix::zeros(vr.rows(), order.len());
    for (dst, &src) in order.iter().enumerate() {
        for row in 0..u.rows() {
            us.set(row, dst, u.get(row, src));
        }
        for row in 0..vr.rows() {
            vs.set(row, dst, vr.get(row, src));
        }
    }
    Ok(Svd {
        u: us,
        s: order.iter().map(|&i| s[i]).collect(),
        v: vs,
    })
}

/// Options for [`truncated_svd`].
#[derive(Debug, Clone, Copy)]
pub struct SvdOptions {
    pub oversample: usize,
    /// Power iterations always performed.
    pub power_iterations: usize,
    /// Further iterations stop once the leading estimates move by less than
    /// `convergence_tol` relative, or after this many in total.
    pub max_power_iterations: usize,
    pub convergence_tol: f64,
    /// Singular values below `rel_tol · σ₁` count as zero (rank clipping).
    pub rel_tol: f64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            oversample: 20,
            power_iterations: 2,
            max_power_iterations: 10,
            convergence_tol: 1e-7,
            rel_tol: 1e-10,
        }
    }
}

/// Leading `d` singular triplets of a sparse matrix.
///
/// Small problems (where the sketch would cover at least half the smaller
/// dimension) are solved exactly; otherwise a seeded randomized range finder
/// is used.
pub fn truncated_svd(a: &SparseMatrix, d: usize, opts: SvdOptions) -> Result<Svd> {
    if d == 0 {
        return Err(GcaError::Argument("target dimension must be ≥ 1".into()));
    }
    let p = a.rows().min(a.cols());
    if p == 0 {
        return Err(GcaError::Build("cannot factor an empty matrix".into()));
    }
    let l = (d + opts.oversample).min(p);
    if 2 * l >= p {
        return Ok(svd_dense(&a.to_dense())?.truncate(d, opts.rel_tol));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(RANGE_FINDER_SEED);
    let omega_data: Vec<f64> = (0..a.cols() * l)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let omega = Matrix::from_vec(a.cols(), l, omega_data)?;
    let mut q = qr_mgs(&a.mul_dense(&omega)).0;
    // Aᵀ Q = Z R, so R carries the current singular value estimates.
    let mut previous: Option<Vec<f64>> = None;
    for it in 0..opts.max_power_iterations.max(opts.power_iterations) {
        let (z, r) = qr_mgs(&a.t_mul_dense(&q));
        if it >= opts.power_iterations {
            let est: Vec<f64> = svd_dense(&r)?.s.into_iter().take(d).collect();
            let settled = previous.as_ref().is_some_and(|p| {
                p.iter()
                    .zip(&est)
                    .all(|(x, y)| (x - y).abs() <= opts.convergence_tol * est[0])
            });
            if settled {
                break;
            }
            previous = Some(est);
        }
        q = qr_mgs(&a.mul_dense(&z)).0;
    }
    // Bᵀ = Aᵀ Q is n × l; its SVD gives A ≈ (Q V') Σ U'ᵀ.
    let bt = a.t_mul_dense(&q);
    let small = svd_dense(&bt)?;
    let u = q.matmul(&small.v)?;
    Ok(Svd {
        u,
        s: small.s,
        v: small.u,
    }
    .truncate(d, opts.rel_tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    #[test]
    fn diagonal_singular_values() {
        let m = Matrix::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let svd = truncated_svd(&SparseMatrix::from_dense(&m), 2, SvdOptions::default()).unwrap();
        assert_eq!(svd.rank(), 2);
        assert!((svd.s[0] - 3.0).abs() < 1e-12);
        assert!((svd.s[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_is_clipped() {
        let u = [1.0, 2.0, -1.0, 0.5];
        let v = [3.0, 0.0, 1.0, 1.0, 2.0, -2.0];
        let rows: Vec<Vec<f64>> = u
            .iter()
            .map(|a| v.iter().map(|b| a * b).collect())
            .collect();
        let m = Matrix::from_rows(&rows).unwrap();
        let svd = truncated_svd(&SparseMatrix::from_dense(&m), 5, SvdOptions::default()).unwrap();
        assert_eq!(svd.rank(), 1);
        assert!((svd.s[0] - norm(&u) * norm(&v)).abs() < 1e-10);
    }

    #[test]
    fn dense_reconstruction() {
        let m = lcg_matrix(12, 7, 3);
        let svd = svd_dense(&m).unwrap();
        let back = svd.reconstruct();
        let diff: Vec<f64> = back
            .as_slice()
            .iter()
            .zip(m.as_slice())
            .map(|(a, b)| a - b)
            .collect();
        assert!(norm(&diff) / m.frobenius() < 1e-12);
        // Orthonormal factors.
        let utu = svd.u.transpose().matmul(&svd.u).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((utu.get(i, j) - want).abs() < 1e-12);
            }
        }
        assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn randomized_path_matches_dense_on_decaying_spectrum() {
        // 300 × 200 with singular values 2^-i.
        let a = lcg_matrix(300, 40, 11);
        let b = lcg_matrix(200, 40, 12);
        let (qa, _) = qr_mgs(&a);
        let (qb, _) = qr_mgs(&b);
        let mut scaled = qa.clone();
        for r in 0..scaled.rows() {
            for c in 0..40 {
                scaled.set(r, c, qa.get(r, c) * 0.5f64.powi(c as i32));
            }
        }
        let m = scaled.matmul(&qb.transpose()).unwrap();
        let sparse = SparseMatrix::from_dense(&m);
        let fast = truncated_svd(&sparse, 8, SvdOptions::default()).unwrap();
        for (i, s) in fast.s.iter().enumerate() {
            let want = 0.5f64.powi(i as i32);
            assert!((s - want).abs() / want < 1e-9, "σ{i} = {s}, want {want}");
        }
    }

    #[test]
    fn sparse_products_match_dense() {
        let m = lcg_matrix(6, 4, 5);
        let x = lcg_matrix(4, 3, 6);
        let y = lcg_matrix(6, 2, 7);
        let s = SparseMatrix::from_dense(&m);
        assert_eq!(s.mul_dense(&x), m.matmul(&x).unwrap());
        let want = m.transpose().matmul(&y).unwrap();
        let got = s.t_mul_dense(&y);
        for (a, b) in got.as_slice().iter().zip(want.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn qr_handles_dependent_columns() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![1.0, 2.0, 1.0]]).unwrap();
        let (q, r) = qr_mgs(&m);
        let back = q.matmul(&r).unwrap();
        for (a, b) in back.as_slice().iter().zip(m.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(r.get(1, 1), 0.0);
    }
}
