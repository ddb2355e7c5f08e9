//! Householder QR for complex matrices.
//!
//! The factorization is made unique by forcing the diagonal of `R` to
//! be real and positive: column phases are absorbed into `Q`. This is
//! what keeps the canonical-form rotation deterministic.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::matrix::ComplexMatrix;

/// Relative tolerance of the column-rank test on the diagonal of `R`.
pub const RANK_TOL: f64 = 1e-10;

/// Thin QR of a full-column-rank matrix: `A = Q R` with `Q` an N x m
/// slice of a unitary matrix (`Q† Q = I_m`) and `R` m x m upper
/// triangular with strictly positive real diagonal.
pub fn qr_decompose(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (q_full, r_full) = qr_full(a)?;
    let m = a.cols();
    let q = q_full.block(0, a.rows(), 0, m);
    let r = r_full.block(0, m, 0, m);
    Ok((q, r))
}

/// Full QR: `A = Q R` with `Q` N x N unitary whose first m columns are
/// the thin factor (phase-fixed), and `R` N x m upper triangular whose
/// leading m x m block has positive real diagonal. The trailing columns
/// of `Q` complete the basis deterministically via the Householder
/// reflectors.
pub fn qr_full(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = a.rows();
    let m = a.cols();
    if n < m {
        return Err(Error::DimensionMismatch(format!(
            "QR expects rows >= cols, got {n}x{m}"
        )));
    }
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..m {
        // Householder vector for column k below the diagonal.
        let x: Vec<Complex64> = (k..n).map(|i| r[(i, k)]).collect();
        let norm_x = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue; // rank test below will reject this column
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            Complex64::ONE
        };
        let alpha = -phase * norm_x;
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if vnorm2 > 0.0 {
            let beta = 2.0 / vnorm2;
            // R <- H R on rows k.., columns k..
            for j in k..m {
                let dot: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(i, vi)| vi.conj() * r[(k + i, j)])
                    .sum();
                let w = beta * dot;
                for (i, vi) in v.iter().enumerate() {
                    let sub = w * vi;
                    r[(k + i, j)] -= sub;
                }
            }
            // Q <- Q H on columns k..
            for i in 0..n {
                let dot: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(l, vl)| q[(i, k + l)] * vl)
                    .sum();
                let w = beta * dot;
                for (l, vl) in v.iter().enumerate() {
                    let sub = w * vl.conj();
                    q[(i, k + l)] -= sub;
                }
            }
        }
        // Exact zeros below the diagonal of column k.
        r[(k, k)] = alpha;
        for i in k + 1..n {
            r[(i, k)] = Complex64::ZERO;
        }
    }
    // Absorb diagonal phases into Q so diag(R) is real positive.
    for k in 0..m {
        let d = r[(k, k)];
        if d.norm() == 0.0 {
            continue;
        }
        let phase = d / d.norm();
        for j in k..m {
            r[(k, j)] *= phase.conj();
        }
        r[(k, k)] = Complex64::new(d.norm(), 0.0);
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    // Column-rank test on the R diagonal.
    let diag: Vec<f64> = (0..m).map(|k| r[(k, k)].norm()).collect();
    let largest = diag.iter().cloned().fold(0.0, f64::max);
    let smallest = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if smallest <= RANK_TOL * largest {
        return Err(Error::RankDeficient(format!(
            "R diagonal range [{smallest:.3e}, {largest:.3e}] fails rank test"
        )));
    }
    Ok((q, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pseudo_random(rows: usize, cols: usize, salt: u64) -> ComplexMatrix {
        // Deterministic filler, decorrelated enough for rank tests.
        let mut state = salt.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        ComplexMatrix::from_fn(rows, cols, |_, _| c(next(), next()))
    }

    #[test]
    fn identity_factors_trivially() {
        let a = ComplexMatrix::identity(3);
        let (q, r) = qr_decompose(&a).unwrap();
        assert!(q.sub(&a).frobenius_norm() < 1e-14);
        assert!(r.sub(&a).frobenius_norm() < 1e-14);
    }

    #[test]
    fn single_column_phase_fix() {
        // A = (0, 2i)^T: R must be the positive scalar 2, phase goes to Q.
        let a = ComplexMatrix::from_column(&[c(0.0, 0.0), c(0.0, 2.0)]);
        let (q, r) = qr_decompose(&a).unwrap();
        assert!((r[(0, 0)] - c(2.0, 0.0)).norm() < 1e-14);
        assert!((q[(0, 0)] - c(0.0, 0.0)).norm() < 1e-14);
        assert!((q[(1, 0)] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let a = pseudo_random(6, 3, 42);
        let (q, r) = qr_decompose(&a).unwrap();
        let rec_err = q.mul(&r).sub(&a).frobenius_norm() / a.frobenius_norm();
        assert!(rec_err <= 1e-12, "reconstruction error {rec_err:.3e}");
        let gram = q.adjoint().mul(&q);
        let orth_err = gram.sub(&ComplexMatrix::identity(3)).frobenius_norm();
        assert!(orth_err <= 1e-12, "orthonormality error {orth_err:.3e}");
        for k in 0..3 {
            assert!(r[(k, k)].re > 0.0 && r[(k, k)].im == 0.0);
        }
    }

    #[test]
    fn full_qr_is_unitary_completion() {
        let a = pseudo_random(7, 4, 7);
        let (qf, rf) = qr_full(&a).unwrap();
        let gram = qf.adjoint().mul(&qf);
        assert!(gram.sub(&ComplexMatrix::identity(7)).frobenius_norm() < 1e-12);
        let rec = qf.mul(&rf).sub(&a).frobenius_norm() / a.frobenius_norm();
        assert!(rec < 1e-12);
        // First columns agree with the thin factorization.
        let (qt, _) = qr_decompose(&a).unwrap();
        assert!(qf.block(0, 7, 0, 4).sub(&qt).frobenius_norm() < 1e-13);
    }

    #[test]
    fn rank_deficient_rejected() {
        let mut a = pseudo_random(5, 3, 3);
        // Make column 2 a multiple of column 0.
        for i in 0..5 {
            a[(i, 2)] = a[(i, 0)] * c(2.0, -1.0);
        }
        assert!(matches!(qr_decompose(&a), Err(Error::RankDeficient(_))));
    }
}
