//! Hermitian matrices stored as a packed lower triangle.
//!
//! Conjugate symmetry holds exactly by construction: only the lower
//! triangle is stored and the upper triangle is mirrored on read.
//! Spectral matrix functions go through the standard real embedding
//! `H = A + iB  ->  [[A, -B], [B, A]]`, which is real symmetric and is
//! diagonalized by cyclic Jacobi sweeps. That keeps the eigensolver a
//! single well-tested real routine.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::matrix::ComplexMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    /// Row-major packed lower triangle: row i contributes i+1 entries.
    lower: Vec<Complex64>,
}

#[inline]
fn pack_idx(i: usize, j: usize) -> usize {
    debug_assert!(j <= i);
    i * (i + 1) / 2 + j
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1);
        Self {
            dim,
            lower: vec![Complex64::ZERO; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.lower[pack_idx(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.lower[pack_idx(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Build from a generator for the lower triangle (i >= j). Imaginary
    /// parts of diagonal entries are discarded.
    pub fn from_fn_lower(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                let v = f(i, j);
                m.lower[pack_idx(i, j)] = if i == j { Complex64::new(v.re, 0.0) } else { v };
            }
        }
        m
    }

    /// Symmetrize a square matrix into Hermitian form, `(A + A†)/2`.
    /// Errors if the skew part exceeds `tol` relative to the magnitude.
    pub fn from_matrix(a: &ComplexMatrix, tol: f64) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::DimensionMismatch(format!(
                "hermitian source must be square, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let mut skew: f64 = 0.0;
        for i in 0..a.rows() {
            for j in 0..=i {
                skew = skew.max((a[(i, j)] - a[(j, i)].conj()).norm());
            }
        }
        if skew > tol * scale {
            return Err(Error::DomainError(format!(
                "matrix is not Hermitian: skew part {skew:.3e} vs scale {scale:.3e}"
            )));
        }
        Ok(Self::from_fn_lower(a.rows(), |i, j| {
            (a[(i, j)] + a[(j, i)].conj()) * 0.5
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i >= j {
            self.lower[pack_idx(i, j)]
        } else {
            self.lower[pack_idx(j, i)].conj()
        }
    }

    pub fn set_lower(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(j <= i && i < self.dim);
        self.lower[pack_idx(i, j)] = if i == j { Complex64::new(v.re, 0.0) } else { v };
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Principal sub-block on the contiguous index range `r0..r1`.
    pub fn principal_block(&self, r0: usize, r1: usize) -> Self {
        assert!(r0 < r1 && r1 <= self.dim);
        Self::from_fn_lower(r1 - r0, |i, j| self.get(r0 + i, r0 + j))
    }

    /// Rectangular off-diagonal block as a general matrix.
    pub fn off_block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.to_matrix().frobenius_norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in out.lower.iter_mut() {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, b) in out.lower.iter_mut().zip(&other.lower) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, b) in out.lower.iter_mut().zip(&other.lower) {
            *a -= b;
        }
        out
    }

    /// Real quadratic form `x† M x`.
    pub fn quad_form(&self, x: &[Complex64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        let mut acc = Complex64::ZERO;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += x[i].conj() * self.get(i, j) * x[j];
            }
        }
        acc.re
    }

    /// Cholesky factor `L` (lower triangular) with `M = L L†`.
    /// Fails with `NotPositiveDefinite` on a nonpositive pivot.
    pub fn cholesky(&self) -> Result<ComplexMatrix> {
        let n = self.dim;
        let scale = self
            .lower
            .iter()
            .map(|c| c.norm())
            .fold(f64::MIN_POSITIVE, f64::max);
        let mut l = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = self.get(j, j).re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if d <= 1e-14 * scale {
                return Err(Error::NotPositiveDefinite(format!(
                    "Cholesky pivot {d:.3e} at index {j}"
                )));
            }
            let diag = d.sqrt();
            l[(j, j)] = Complex64::new(diag, 0.0);
            for i in j + 1..n {
                let mut acc = self.get(i, j);
                for k in 0..j {
                    acc -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = acc / diag;
            }
        }
        Ok(l)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_ok()
    }

    /// Solve `M x = b` through the Cholesky factorization.
    pub fn solve_vec(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.solve_mat(&ComplexMatrix::from_column(b))?.column(0))
    }

    /// Solve `M X = B` through the Cholesky factorization.
    pub fn solve_mat(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        if b.rows() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "rhs has {} rows, expected {}",
                b.rows(),
                self.dim
            )));
        }
        let l = self.cholesky()?;
        let n = self.dim;
        let mut x = b.clone();
        // Forward: L y = b.
        for j in 0..x.cols() {
            for i in 0..n {
                let mut acc = x[(i, j)];
                for k in 0..i {
                    acc -= l[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = acc / l[(i, i)];
            }
            // Backward: L† x = y.
            for i in (0..n).rev() {
                let mut acc = x[(i, j)];
                for k in i + 1..n {
                    acc -= l[(k, i)].conj() * x[(k, j)];
                }
                x[(i, j)] = acc / l[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.solve_mat(&ComplexMatrix::identity(self.dim))?;
        Self::from_matrix(&inv, 1e-8)
    }

    /// Eigenvalues of the matrix, ascending. Each eigenvalue of `H`
    /// appears twice in the real embedding; duplicates are collapsed by
    /// taking every second entry.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let t = self.real_embedding();
        let (mut vals, _) = jacobi_symmetric(t);
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (0..self.dim).map(|i| (vals[2 * i] + vals[2 * i + 1]) * 0.5).collect()
    }

    /// Apply a spectral function: `f(H) = V f(Λ) V†`. The function is
    /// applied to the eigenvalues of the real embedding and the result
    /// is folded back to Hermitian form.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let n = self.dim;
        let t = self.real_embedding();
        let (vals, vecs) = jacobi_symmetric(t);
        let fv: Vec<f64> = vals.iter().map(|&l| f(l)).collect::<Result<_>>()?;
        // F = Q f(Λ) Q^T over the 2n-dimensional embedding.
        let two_n = 2 * n;
        let mut fmat = vec![vec![0.0f64; two_n]; two_n];
        for k in 0..two_n {
            let fk = fv[k];
            if fk == 0.0 {
                continue;
            }
            for i in 0..two_n {
                let qik = vecs[i][k];
                if qik == 0.0 {
                    continue;
                }
                let w = fk * qik;
                for j in 0..two_n {
                    fmat[i][j] += w * vecs[j][k];
                }
            }
        }
        // Fold back: embed(X) = [[Re X, -Im X], [Im X, Re X]].
        Ok(Self::from_fn_lower(n, |i, j| {
            let re = (fmat[i][j] + fmat[n + i][n + j]) * 0.5;
            let im = (fmat[n + i][j] - fmat[i][n + j]) * 0.5;
            Complex64::new(re, im)
        }))
    }

    fn real_embedding(&self) -> Vec<Vec<f64>> {
        let n = self.dim;
        let mut t = vec![vec![0.0f64; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                let h = self.get(i, j);
                t[i][j] = h.re;
                t[n + i][n + j] = h.re;
                t[n + i][j] = h.im;
                t[i][n + j] = -h.im;
            }
        }
        t
    }
}

/// Cyclic Jacobi eigensolver for a real symmetric matrix. Returns
/// `(eigenvalues, eigenvectors)` with eigenvectors as columns of the
/// returned matrix, unsorted.
#[allow(clippy::needless_range_loop)]
fn jacobi_symmetric(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0f64; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let norm: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let tol = 1e-15 * norm;
    for _sweep in 0..64 {
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let app = a[p][p];
                let aqq = a[q][q];
                let theta = (aqq - app) / (2.0 * apq);
                // Stable tangent of the rotation angle.
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a[i][i]).collect();
    (vals, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_pd(dim: usize) -> HermitianMatrix {
        // A A† + I is Hermitian positive definite for any A.
        let a = ComplexMatrix::from_fn(dim, dim, |i, j| {
            c(
                ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.3,
                ((i * 5 + j * 13) % 7) as f64 / 7.0 - 0.5,
            )
        });
        let g = a.mul(&a.adjoint()).add(&ComplexMatrix::identity(dim));
        HermitianMatrix::from_matrix(&g, 1e-12).unwrap()
    }

    #[test]
    fn mirror_on_read_is_exact() {
        let m = HermitianMatrix::from_fn_lower(3, |i, j| c((i + j) as f64, (i as f64) - (j as f64)));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), m.get(j, i).conj());
            }
            assert_eq!(m.get(i, i).im, 0.0);
        }
    }

    #[test]
    fn cholesky_reconstructs() {
        let m = sample_pd(5);
        let l = m.cholesky().unwrap();
        let rec = l.mul(&l.adjoint());
        let err = rec.sub(&m.to_matrix()).frobenius_norm() / m.frobenius_norm();
        assert!(err < 1e-13, "relative error {err:.3e}");
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = HermitianMatrix::from_diagonal(&[1.0, -0.5, 2.0]);
        assert!(matches!(m.cholesky(), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn solve_matches_lu() {
        let m = sample_pd(6);
        let b: Vec<Complex64> = (0..6).map(|i| c(i as f64, -1.0)).collect();
        let x_chol = m.solve_vec(&b).unwrap();
        let x_lu = m.to_matrix().lu_solve_vec(&b).unwrap();
        for (a, b) in x_chol.iter().zip(&x_lu) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn eigenvalues_sum_to_trace() {
        let m = sample_pd(4);
        let vals = m.eigenvalues();
        let sum: f64 = vals.iter().sum();
        assert!((sum - m.trace()).abs() < 1e-10 * m.trace().abs());
        assert!(vals.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn map_spectrum_identity_function_reproduces_matrix() {
        let m = sample_pd(4);
        let same = m.map_spectrum(Ok).unwrap();
        let err = same.sub(&m).frobenius_norm() / m.frobenius_norm();
        assert!(err < 1e-12, "relative error {err:.3e}");
    }
}
