//! The maximal invariant statistic, the transformation group it is
//! invariant under, and the constructive machinery used to test
//! maximality.
//!
//! Group elements are pairs `(G, f)` with `G` block upper triangular
//! (nonsingular diagonal blocks of sizes t, r, N-m) and `f` supported
//! on the first t coordinates, acting by `(z, S) -> (G z + f, G S G†)`.
//! For m < N the maximal invariant is the pair
//! `(z_{2.3}† S_{2.3}⁻¹ z_{2.3}, z3† S33⁻¹ z3)`; for m = N it is the
//! scalar `z2† S22⁻¹ z2`. Both are reported through the bounded
//! parametrization `p = 1/(1 + ...)`.

use num_complex::Complex64;
use rand::Rng;

use crate::canonical::{CanonicalForm, Dims, SufficientStatistic};
use crate::distributions::standard_complex_normal;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_inv_sqrt, hermitian_sqrt, inner, qr_decompose, schur_complement, vec_add, vec_norm,
    vec_sub, ComplexMatrix, HermitianMatrix,
};

/// Maximal invariant of a sufficient statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaximalInvariant {
    /// Case m < N: quadratic forms (m1, m2) and the equivalent bounded
    /// pair (p1, p2).
    Split { m1: f64, m2: f64, p1: f64, p2: f64 },
    /// Case m = N: the scalar p3 = 1/(1 + z2† S22⁻¹ z2).
    Full { p3: f64 },
}

impl MaximalInvariant {
    pub fn split(&self) -> Result<(f64, f64)> {
        match self {
            MaximalInvariant::Split { p1, p2, .. } => Ok((*p1, *p2)),
            MaximalInvariant::Full { .. } => Err(Error::DomainError(
                "expected split-case invariant (m < N)".into(),
            )),
        }
    }

    pub fn p3(&self) -> Result<f64> {
        match self {
            MaximalInvariant::Full { p3 } => Ok(*p3),
            MaximalInvariant::Split { .. } => Err(Error::DomainError(
                "expected full-case invariant (m = N)".into(),
            )),
        }
    }

    /// Relative agreement on the unbounded (m1, m2) scale.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let rel = |a: f64, b: f64| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()));
        match (self, other) {
            (
                MaximalInvariant::Split { m1, m2, .. },
                MaximalInvariant::Split { m1: n1, m2: n2, .. },
            ) => rel(*m1, *n1) && rel(*m2, *n2),
            (MaximalInvariant::Full { p3 }, MaximalInvariant::Full { p3: q3 }) => {
                let a = (1.0 - p3) / p3;
                let b = (1.0 - q3) / q3;
                rel(a, b)
            }
            _ => false,
        }
    }
}

/// One element of the invariance group.
#[derive(Debug, Clone)]
pub struct GroupElement {
    pub dims: Dims,
    /// Block upper triangular N x N matrix.
    pub g: ComplexMatrix,
    /// Shift supported on the first t coordinates.
    pub f: Vec<Complex64>,
}

impl GroupElement {
    /// Validate block structure: zeros below the diagonal blocks and a
    /// shift confined to the first t coordinates.
    pub fn new(dims: Dims, g: ComplexMatrix, f: Vec<Complex64>) -> Result<Self> {
        let n = dims.n;
        if g.rows() != n || g.cols() != n || f.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "G is {}x{}, f has {} entries, expected N = {}",
                g.rows(),
                g.cols(),
                f.len(),
                n
            )));
        }
        let (t, m) = (dims.t, dims.m());
        let block_of = |i: usize| usize::from(i >= t) + usize::from(i >= m);
        for i in 0..n {
            for j in 0..n {
                if block_of(i) > block_of(j) && g[(i, j)].norm() != 0.0 {
                    return Err(Error::DomainError(format!(
                        "G has nonzero entry below the block diagonal at ({i}, {j})"
                    )));
                }
            }
        }
        if f[t..].iter().any(|v| v.norm() != 0.0) {
            return Err(Error::DomainError(
                "shift f must vanish outside the first t coordinates".into(),
            ));
        }
        // Nonsingular diagonal blocks.
        for (lo, hi) in [(0, t), (t, m), (m, n)] {
            if lo == hi {
                continue;
            }
            let block = g.block(lo, hi, lo, hi);
            block
                .lu_inverse()
                .map_err(|_| Error::SingularBlock(format!("diagonal block {lo}..{hi} singular")))?;
        }
        Ok(Self { dims, g, f })
    }

    pub fn identity(dims: Dims) -> Self {
        Self {
            dims,
            g: ComplexMatrix::identity(dims.n),
            f: vec![Complex64::ZERO; dims.n],
        }
    }

    /// Group composition `self ∘ other = (G_o G_s, G_o f_s + f_o)`:
    /// applying the result equals applying `self` first, then `other`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            dims: self.dims,
            g: other.g.mul(&self.g),
            f: vec_add(&other.g.mul_vec(&self.f), &other.f),
        }
    }
}

/// Group action on the sufficient statistic.
pub fn apply_group_element(
    element: &GroupElement,
    stat: &SufficientStatistic,
) -> Result<SufficientStatistic> {
    if element.dims != stat.dims {
        return Err(Error::DimensionMismatch(format!(
            "group element dims {:?} vs statistic dims {:?}",
            element.dims, stat.dims
        )));
    }
    let z = vec_add(&element.g.mul_vec(&stat.z), &element.f);
    let gsg = element.g.mul(&stat.s.to_matrix()).mul(&element.g.adjoint());
    let s = HermitianMatrix::from_matrix(&gsg, 1e-8)?;
    SufficientStatistic::new(stat.dims, z, s)
}

/// Maximal invariant of the sufficient statistic.
pub fn compute_maximal_invariant(stat: &SufficientStatistic) -> Result<MaximalInvariant> {
    let dims = stat.dims;
    if dims.is_full() {
        let x = stat
            .s22()
            .solve_vec(stat.z2())
            .map_err(|_| Error::SingularBlock("S22 not invertible".into()))?;
        let quad = inner(stat.z2(), &x).re.max(0.0);
        return Ok(MaximalInvariant::Full {
            p3: 1.0 / (1.0 + quad),
        });
    }
    let s33 = stat.s33();
    let x3 = s33
        .solve_vec(stat.z3())
        .map_err(|_| Error::SingularBlock("S33 not invertible".into()))?;
    let m2 = inner(stat.z3(), &x3).re.max(0.0);
    let s23 = stat.s23();
    let z23 = vec_sub(stat.z2(), &s23.mul_vec(&x3));
    // S_{2.3} = S22 - S23 S33⁻¹ S32.
    let tail = stat.s.principal_block(dims.t, dims.n);
    let s2_3 = schur_complement(&tail, dims.r)
        .map_err(|_| Error::SingularBlock("S33 not invertible".into()))?;
    let y = s2_3
        .solve_vec(&z23)
        .map_err(|_| Error::SingularBlock("S_{2.3} not invertible".into()))?;
    let m1 = inner(&z23, &y).re.max(0.0);
    let p2 = 1.0 / (1.0 + m2);
    let p1 = 1.0 / (1.0 + m1 / (1.0 + m2));
    Ok(MaximalInvariant::Split { m1, m2, p1, p2 })
}

/// Random group element with per-block condition number at most
/// `condition_cap`: diagonal blocks are built as U diag(σ) V† with
/// singular values log-uniform in [cap^{-1/2}, cap^{1/2}].
pub fn random_group_element(
    dims: Dims,
    rng: &mut impl Rng,
    condition_cap: f64,
) -> Result<GroupElement> {
    assert!(condition_cap > 1.0, "condition cap must exceed 1");
    let n = dims.n;
    let (t, m) = (dims.t, dims.m());
    let mut g = ComplexMatrix::zeros(n, n);
    let half_log = 0.5 * condition_cap.ln();
    for (lo, hi) in [(0, t), (t, m), (m, n)] {
        if lo == hi {
            continue;
        }
        let s = hi - lo;
        let u = random_unitary(s, rng);
        let v = random_unitary(s, rng);
        let sing = ComplexMatrix::from_fn(s, s, |i, j| {
            if i == j {
                let x: f64 = rng.random();
                Complex64::new(((2.0 * x - 1.0) * half_log).exp(), 0.0)
            } else {
                Complex64::ZERO
            }
        });
        g.set_block(lo, lo, &u.mul(&sing).mul(&v.adjoint()));
    }
    // Off-diagonal blocks are unconstrained.
    for (r0, r1, c0, c1) in [(0, t, t, m), (0, t, m, n), (t, m, m, n)] {
        if r0 == r1 || c0 == c1 {
            continue;
        }
        let b = ComplexMatrix::from_fn(r1 - r0, c1 - c0, |_, _| standard_complex_normal(rng));
        g.set_block(r0, c0, &b);
    }
    let mut f = vec![Complex64::ZERO; n];
    for slot in f.iter_mut().take(t) {
        *slot = standard_complex_normal(rng);
    }
    GroupElement::new(dims, g, f)
}

fn random_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    loop {
        let a = ComplexMatrix::from_fn(n, n, |_, _| standard_complex_normal(rng));
        if let Ok((q, _)) = qr_decompose(&a) {
            return q;
        }
    }
}

/// Unitary matrix mapping `from` onto `to`, assuming equal norms.
/// Composes the Householder reflectors that send each vector to the
/// first basis vector, with a phase fix in between; falls back to the
/// identity when the vectors already coincide.
fn unitary_aligning(from: &[Complex64], to: &[Complex64]) -> ComplexMatrix {
    let n = from.len();
    debug_assert_eq!(n, to.len());
    let scale = vec_norm(to).max(vec_norm(from));
    if scale == 0.0 || vec_norm(&vec_sub(to, from)) <= 1e-12 * scale {
        return ComplexMatrix::identity(n);
    }
    let (h_to, alpha_to) = householder_to_e1(to);
    let (h_from, alpha_from) = householder_to_e1(from);
    let ratio = alpha_to / alpha_from;
    let phase = ratio / ratio.norm();
    let mut d = ComplexMatrix::identity(n);
    d[(0, 0)] = phase;
    h_to.mul(&d).mul(&h_from)
}

/// Hermitian unitary reflector H with `H x = α e1`, `|α| = ‖x‖`.
fn householder_to_e1(x: &[Complex64]) -> (ComplexMatrix, Complex64) {
    let n = x.len();
    let norm = vec_norm(x);
    let phase = if x[0].norm() > 0.0 {
        x[0] / x[0].norm()
    } else {
        Complex64::ONE
    };
    let alpha = -phase * norm;
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vnorm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    if vnorm2 == 0.0 {
        return (ComplexMatrix::identity(n), alpha);
    }
    let beta = 2.0 / vnorm2;
    let h = ComplexMatrix::from_fn(n, n, |i, j| {
        let kron = if i == j { Complex64::ONE } else { Complex64::ZERO };
        kron - beta * v[i] * v[j].conj()
    });
    (h, alpha)
}

/// Pieces of the block factorization `S2⁻¹ = P† W² P` for the trailing
/// (r + nm) block of a statistic: `wp = W P` and its inverse.
struct WhiteningPair {
    wp: ComplexMatrix,
    wp_inv: ComplexMatrix,
}

fn whitening_pair(s2: &HermitianMatrix, r: usize) -> Result<WhiteningPair> {
    let total = s2.dim();
    if total == r {
        // No trailing block: W P reduces to S22^{-1/2}.
        let inv_sqrt = hermitian_inv_sqrt(s2)?;
        let sqrt = hermitian_sqrt(s2)?;
        return Ok(WhiteningPair {
            wp: inv_sqrt.to_matrix(),
            wp_inv: sqrt.to_matrix(),
        });
    }
    let s23 = s2.off_block(0, r, r, total);
    let s33 = s2.principal_block(r, total);
    let s2_3 = schur_complement(s2, r)?;
    let s2_3_inv_sqrt = hermitian_inv_sqrt(&s2_3)?;
    let s2_3_sqrt = hermitian_sqrt(&s2_3)?;
    let s33_inv_sqrt = hermitian_inv_sqrt(&s33)?;
    let s33_sqrt = hermitian_sqrt(&s33)?;
    // S33⁻¹ S32 via Cholesky solve.
    let s33_inv_s32 = s33
        .solve_mat(&s23.adjoint())
        .map_err(|_| Error::SingularBlock("S33 not invertible".into()))?;
    let mut wp = ComplexMatrix::zeros(total, total);
    wp.set_block(0, 0, &s2_3_inv_sqrt.to_matrix());
    let top_right = s2_3_inv_sqrt
        .to_matrix()
        .mul(&s33_inv_s32.adjoint())
        .scale(Complex64::new(-1.0, 0.0));
    wp.set_block(0, r, &top_right);
    wp.set_block(r, r, &s33_inv_sqrt.to_matrix());
    // (W P)⁻¹ = P⁻¹ W⁻¹ with P⁻¹ flipping the sign of the coupling.
    let mut wp_inv = ComplexMatrix::zeros(total, total);
    wp_inv.set_block(0, 0, &s2_3_sqrt.to_matrix());
    wp_inv.set_block(0, r, &s33_inv_s32.adjoint().mul(&s33_sqrt.to_matrix()));
    wp_inv.set_block(r, r, &s33_sqrt.to_matrix());
    Ok(WhiteningPair { wp, wp_inv })
}

/// Reconstruct a group element mapping `stat_b` onto `stat_a`, which
/// exists whenever the two statistics share the same maximal
/// invariant. Errors with `InvariantMismatch` when they do not (the
/// element may then not exist).
pub fn reconstruct_group_element(
    stat_a: &SufficientStatistic,
    stat_b: &SufficientStatistic,
) -> Result<GroupElement> {
    if stat_a.dims != stat_b.dims {
        return Err(Error::DimensionMismatch(format!(
            "dims {:?} vs {:?}",
            stat_a.dims, stat_b.dims
        )));
    }
    let inv_a = compute_maximal_invariant(stat_a)?;
    let inv_b = compute_maximal_invariant(stat_b)?;
    if !inv_a.approx_eq(&inv_b, 1e-8) {
        return Err(Error::InvariantMismatch(format!(
            "{inv_a:?} vs {inv_b:?}"
        )));
    }
    let dims = stat_a.dims;
    let (t, n) = (dims.t, dims.n);
    let lower = n - t; // r + nm
    let split_at_r = dims.r;

    // Trailing-block data for both statistics.
    let s2_a = stat_a.s.principal_block(t, n);
    let s2_b = stat_b.s.principal_block(t, n);
    let z23_a = stat_a.z[t..].to_vec();
    let z23_b = stat_b.z[t..].to_vec();

    let pair_a = whitening_pair(&s2_a, split_at_r)?;
    let pair_b = whitening_pair(&s2_b, split_at_r)?;

    // Whitened coordinates y = W P z23, aligned block-by-block.
    let y_a = pair_a.wp.mul_vec(&z23_a);
    let y_b = pair_b.wp.mul_vec(&z23_b);
    let mut u1 = ComplexMatrix::zeros(lower, lower);
    u1.set_block(
        0,
        0,
        &unitary_aligning(&y_b[..split_at_r], &y_a[..split_at_r]),
    );
    if lower > split_at_r {
        u1.set_block(
            split_at_r,
            split_at_r,
            &unitary_aligning(&y_b[split_at_r..], &y_a[split_at_r..]),
        );
    }
    // G3 maps the trailing block of b onto that of a.
    let g3 = pair_a.wp_inv.mul(&u1).mul(&pair_b.wp);

    // G1 from the Schur complements of the leading t x t corner.
    let sc_a = leading_schur(&stat_a.s, t)?;
    let sc_b = leading_schur(&stat_b.s, t)?;
    let g1 = hermitian_sqrt(&sc_a)?
        .to_matrix()
        .mul(&hermitian_inv_sqrt(&sc_b)?.to_matrix());

    // G2 = (S3_a G3⁻† - G1 S3_b) S2_b⁻¹.
    let s3_a = stat_a.s.off_block(0, t, t, n);
    let s3_b = stat_b.s.off_block(0, t, t, n);
    let g3_inv_s3h = g3
        .lu_solve_mat(&s3_a.adjoint())
        .map_err(|_| Error::SingularBlock("G3 singular".into()))?;
    let y_mat = g3_inv_s3h.adjoint().sub(&g1.mul(&s3_b));
    let g2 = s2_b
        .solve_mat(&y_mat.adjoint())
        .map_err(|_| Error::SingularBlock("S2 of second statistic not invertible".into()))?
        .adjoint();

    // f restores the first t coordinates of z.
    let f11 = vec_sub(
        &vec_sub(stat_a.z1(), &g1.mul_vec(stat_b.z1())),
        &g2.mul_vec(&z23_b),
    );
    let mut f = vec![Complex64::ZERO; n];
    f[..t].copy_from_slice(&f11);

    let mut g = ComplexMatrix::zeros(n, n);
    g.set_block(0, 0, &g1);
    g.set_block(0, t, &g2);
    g.set_block(t, t, &g3);
    GroupElement::new(dims, g, f)
}

/// Schur complement `S1 - S3 S2⁻¹ S3†` of the trailing (N-t) block.
fn leading_schur(s: &HermitianMatrix, t: usize) -> Result<HermitianMatrix> {
    schur_complement(s, t)
}

/// Whitening transformation of the trailing coordinates: returns
/// `(w, S0)` with `w = V2 [z2; z3]` and `S0 = V2 S2 V2†`, where V2 is
/// built from the covariance partitions of the canonical form. Under
/// H0 the output is standard complex normal / white Wishart.
pub fn whiten(
    stat: &SufficientStatistic,
    cf: &CanonicalForm,
) -> Result<(Vec<Complex64>, HermitianMatrix)> {
    if stat.dims != cf.dims {
        return Err(Error::DimensionMismatch(format!(
            "statistic dims {:?} vs canonical dims {:?}",
            stat.dims, cf.dims
        )));
    }
    let dims = stat.dims;
    let (t, n, r) = (dims.t, dims.n, dims.r);
    let v2 = if dims.is_full() {
        hermitian_inv_sqrt(&cf.m22())?.to_matrix()
    } else {
        let m_tail = cf.m.principal_block(t, n);
        let m33 = cf.m33();
        let m2_3 = schur_complement(&m_tail, r)?;
        let v22 = hermitian_inv_sqrt(&m2_3)?;
        let m33_inv_m32 = m33
            .solve_mat(&cf.m23().adjoint())
            .map_err(|_| Error::SingularBlock("M33 not invertible".into()))?;
        let mut v2 = ComplexMatrix::zeros(n - t, n - t);
        v2.set_block(0, 0, &v22.to_matrix());
        v2.set_block(
            0,
            r,
            &v22.to_matrix()
                .mul(&m33_inv_m32.adjoint())
                .scale(Complex64::new(-1.0, 0.0)),
        );
        v2.set_block(r, r, &hermitian_inv_sqrt(&m33)?.to_matrix());
        v2
    };
    let w = v2.mul_vec(&stat.z[t..]);
    let s2 = stat.s.principal_block(t, n);
    let s0 = HermitianMatrix::from_matrix(&v2.mul(&s2.to_matrix()).mul(&v2.adjoint()), 1e-8)?;
    Ok((w, s0))
}
