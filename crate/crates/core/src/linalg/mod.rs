//! Complex dense matrix kernels: QR, Hermitian square roots and
//! inverses, Schur complements, and the small vector helpers used by
//! the rest of the crate.
//!
//! All values are immutable after construction and all operations are
//! pure functions of their inputs, so everything here is safe to share
//! across threads.

mod hermitian;
mod matrix;
mod qr;

pub use hermitian::HermitianMatrix;
pub use matrix::{inner, vec_add, vec_norm, vec_scale, vec_sub, ComplexMatrix};
pub use qr::{qr_decompose, qr_full, RANK_TOL};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermitian inverse square root `M^{-1/2}` of a positive definite
/// matrix, computed spectrally. Satisfies `X M X = I` and `X = X†`.
pub fn hermitian_inv_sqrt(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    spectral_power(m, -0.5)
}

/// Hermitian square root `M^{1/2}` of a positive definite matrix.
pub fn hermitian_sqrt(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    spectral_power(m, 0.5)
}

fn spectral_power(m: &HermitianMatrix, exponent: f64) -> Result<HermitianMatrix> {
    let lambda_max = m
        .eigenvalues()
        .iter()
        .cloned()
        .fold(f64::MIN_POSITIVE, f64::max);
    m.map_spectrum(|l| {
        if l <= 1e-13 * lambda_max {
            Err(Error::NotPositiveDefinite(format!(
                "eigenvalue {l:.3e} is not positive"
            )))
        } else {
            Ok(l.powf(exponent))
        }
    })
}

/// Schur complement of the trailing block: for `M = [[A, B], [B†, D]]`
/// with the split after `split` rows, returns `A - B D⁻¹ B†`.
pub fn schur_complement(m: &HermitianMatrix, split: usize) -> Result<HermitianMatrix> {
    let n = m.dim();
    if split == 0 || split >= n {
        return Err(Error::DimensionMismatch(format!(
            "split {split} must lie strictly inside 0..{n}"
        )));
    }
    let a = m.principal_block(0, split);
    let b = m.off_block(0, split, split, n);
    let d = m.principal_block(split, n);
    let d_inv_bh = d
        .solve_mat(&b.adjoint())
        .map_err(|_| Error::SingularBlock("trailing block not invertible".into()))?;
    let prod = b.mul(&d_inv_bh);
    let result = a.to_matrix().sub(&prod);
    HermitianMatrix::from_matrix(&result, 1e-8)
}

/// Interference regression `z2 - S23 S33⁻¹ z3`.
pub fn regress_out(
    z2: &[Complex64],
    z3: &[Complex64],
    s23: &ComplexMatrix,
    s33: &HermitianMatrix,
) -> Result<Vec<Complex64>> {
    if s23.rows() != z2.len() || s23.cols() != z3.len() || s33.dim() != z3.len() {
        return Err(Error::DimensionMismatch(format!(
            "regress_out shapes: z2={}, z3={}, S23={}x{}, S33={}",
            z2.len(),
            z3.len(),
            s23.rows(),
            s23.cols(),
            s33.dim()
        )));
    }
    let x = s33
        .solve_vec(z3)
        .map_err(|_| Error::SingularBlock("S33 not invertible".into()))?;
    Ok(vec_sub(z2, &s23.mul_vec(&x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pseudo_random_pd(dim: usize, salt: u64) -> HermitianMatrix {
        let mut state = salt.wrapping_mul(0x9e3779b97f4a7c15) | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = ComplexMatrix::from_fn(dim, dim, |_, _| c(next(), next()));
        let g = a
            .mul(&a.adjoint())
            .add(&ComplexMatrix::identity(dim).scale(c(0.5, 0.0)));
        HermitianMatrix::from_matrix(&g, 1e-12).unwrap()
    }

    #[test]
    fn inv_sqrt_of_identity_is_identity() {
        let x = hermitian_inv_sqrt(&HermitianMatrix::identity(4)).unwrap();
        assert!(x.sub(&HermitianMatrix::identity(4)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn inv_sqrt_of_diagonal() {
        let m = HermitianMatrix::from_diagonal(&[4.0, 9.0]);
        let x = hermitian_inv_sqrt(&m).unwrap();
        assert!((x.get(0, 0).re - 0.5).abs() < 1e-13);
        assert!((x.get(1, 1).re - 1.0 / 3.0).abs() < 1e-13);
        assert!(x.get(1, 0).norm() < 1e-13);
    }

    #[test]
    fn inv_sqrt_whitens_random_pd() {
        let m = pseudo_random_pd(5, 11);
        let x = hermitian_inv_sqrt(&m).unwrap();
        let xm = x.to_matrix().mul(&m.to_matrix());
        let prod = xm.mul(&x.to_matrix());
        let err = prod.sub(&ComplexMatrix::identity(5)).frobenius_norm();
        assert!(err < 1e-10, "X M X deviates from I by {err:.3e}");
        // X commutes with M and squares to M^{-1}.
        let mx = m.to_matrix().mul(&x.to_matrix());
        let comm = xm.sub(&mx).frobenius_norm() / m.frobenius_norm();
        assert!(comm <= 1e-9, "commutator {comm:.3e}");
        let xx = x.to_matrix().mul(&x.to_matrix());
        let minv = m.inverse().unwrap();
        let sq_err = xx.sub(&minv.to_matrix()).frobenius_norm() / minv.frobenius_norm();
        assert!(sq_err < 1e-10, "X^2 vs M^{{-1}}: {sq_err:.3e}");
    }

    #[test]
    fn inv_sqrt_rejects_indefinite() {
        let m = HermitianMatrix::from_diagonal(&[1.0, -2.0]);
        assert!(matches!(
            hermitian_inv_sqrt(&m),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn schur_block_diagonal_returns_leading_block() {
        let m = HermitianMatrix::from_diagonal(&[2.0, 3.0, 5.0, 7.0]);
        let s = schur_complement(&m, 2).unwrap();
        assert!(s
            .sub(&HermitianMatrix::from_diagonal(&[2.0, 3.0]))
            .frobenius_norm()
            .abs()
            < 1e-14);
    }

    #[test]
    fn schur_scalar_hand_value() {
        // [[2, 1], [1, 1]]: 2 - 1*1*1 = 1.
        let m = HermitianMatrix::from_fn_lower(2, |i, j| {
            c(if i == j { if i == 0 { 2.0 } else { 1.0 } } else { 1.0 }, 0.0)
        });
        let s = schur_complement(&m, 1).unwrap();
        assert!((s.get(0, 0).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn schur_matches_inverse_partition_identity() {
        // The (1,1) block of M^{-1} is the inverse of the Schur
        // complement of the trailing block.
        let m = pseudo_random_pd(6, 23);
        let split = 2;
        let s = schur_complement(&m, split).unwrap();
        let m_inv = m.inverse().unwrap();
        let top = m_inv.principal_block(0, split);
        let prod = s.to_matrix().mul(&top.to_matrix());
        let err = prod.sub(&ComplexMatrix::identity(split)).frobenius_norm();
        assert!(err < 1e-9, "Schur-inverse identity error {err:.3e}");
        assert!(s.is_positive_definite());
    }

    #[test]
    fn regress_out_trivial_cases() {
        let z2 = vec![c(1.0, 1.0), c(2.0, 0.0)];
        let z3 = vec![c(0.5, -0.5)];
        let s33 = HermitianMatrix::from_diagonal(&[2.0]);
        let zero_s23 = ComplexMatrix::zeros(2, 1);
        let out = regress_out(&z2, &z3, &zero_s23, &s33).unwrap();
        assert_eq!(out, z2);
        let s23 = ComplexMatrix::from_fn(2, 1, |_, _| c(1.0, 0.0));
        let out = regress_out(&z2, &[c(0.0, 0.0)], &s23, &s33).unwrap();
        assert_eq!(out, z2);
    }

    #[test]
    fn regress_out_matches_dense_evaluation() {
        let m = pseudo_random_pd(5, 31);
        let s23 = m.off_block(0, 2, 2, 5);
        let s33 = m.principal_block(2, 5);
        let z2 = vec![c(1.0, -2.0), c(0.0, 1.0)];
        let z3 = vec![c(2.0, 0.0), c(-1.0, 1.0), c(0.5, 0.5)];
        let out = regress_out(&z2, &z3, &s23, &s33).unwrap();
        let dense = s23.mul(&s33.inverse().unwrap().to_matrix()).mul_vec(&z3);
        for (a, b) in out.iter().zip(vec_sub(&z2, &dense)) {
            assert!((a - b).norm() < 1e-11);
        }
    }
}
