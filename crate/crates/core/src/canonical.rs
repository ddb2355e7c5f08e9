//! Reduction of the raw detection problem to canonical form.
//!
//! The QR factorization of `[J H]` yields a rotation `U` that carries
//! the interference subspace onto the first `t` coordinates and the
//! signal subspace onto the next `r`. All downstream statistics work
//! on the rotated primary vector `z = U r` and the secondary scatter
//! matrix `S = Σ (U r_k)(U r_k)†`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{sample_complex_normal, sample_complex_normal_matrix};
use crate::error::{Error, Result};
use crate::linalg::{qr_full, schur_complement, vec_add, ComplexMatrix, HermitianMatrix};
use crate::scenario::{Scenario, SignalParams};
use crate::Hypothesis;

/// Partition sizes (t, r, N - m) used to slice vectors and matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub n: usize,
    pub t: usize,
    pub r: usize,
}

impl Dims {
    pub fn m(&self) -> usize {
        self.t + self.r
    }

    /// Size of the trailing block, `N - m`.
    pub fn nm(&self) -> usize {
        self.n - self.m()
    }

    pub fn is_full(&self) -> bool {
        self.nm() == 0
    }
}

/// Canonical-form reduction of a scenario.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    pub dims: Dims,
    /// N x N unitary rotation with `U Q = [E_t E_r]`.
    pub u: ComplexMatrix,
    /// Thin factor of `[J H] = Q R`.
    pub q_factor: ComplexMatrix,
    /// m x m upper triangular factor with positive real diagonal.
    pub r_factor: ComplexMatrix,
    /// Rotated covariance `M = U M0 U†`.
    pub m: HermitianMatrix,
}

impl CanonicalForm {
    /// t x t upper-left block of R (QR factor of J alone).
    pub fn r_j(&self) -> ComplexMatrix {
        self.r_factor.block(0, self.dims.t, 0, self.dims.t)
    }

    /// t x r off-diagonal block of R.
    pub fn r_0(&self) -> ComplexMatrix {
        self.r_factor.block(0, self.dims.t, self.dims.t, self.dims.m())
    }

    /// r x r lower-right block of R.
    pub fn r_1(&self) -> ComplexMatrix {
        self.r_factor
            .block(self.dims.t, self.dims.m(), self.dims.t, self.dims.m())
    }

    /// Selector of the first t standard basis vectors, N x t.
    pub fn e_t(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dims.n, self.dims.t, |i, j| {
            if i == j {
                Complex64::ONE
            } else {
                Complex64::ZERO
            }
        })
    }

    /// Selector of basis vectors t+1..=m, N x r.
    pub fn e_r(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dims.n, self.dims.r, |i, j| {
            if i == j + self.dims.t {
                Complex64::ONE
            } else {
                Complex64::ZERO
            }
        })
    }

    /// Signal coordinate θ2 = R_1 p.
    pub fn theta2(&self, p: &[Complex64]) -> Result<Vec<Complex64>> {
        if p.len() != self.dims.r {
            return Err(Error::DimensionMismatch(format!(
                "p has {} entries, expected r = {}",
                p.len(),
                self.dims.r
            )));
        }
        Ok(self.r_1().mul_vec(p))
    }

    /// H0 interference coordinate θ10 = R_J q.
    pub fn theta10(&self, q: &[Complex64]) -> Result<Vec<Complex64>> {
        if q.len() != self.dims.t {
            return Err(Error::DimensionMismatch(format!(
                "q has {} entries, expected t = {}",
                q.len(),
                self.dims.t
            )));
        }
        Ok(self.r_j().mul_vec(q))
    }

    /// H1 interference coordinate θ11 = R_J q + R_0 p.
    pub fn theta11(&self, q: &[Complex64], p: &[Complex64]) -> Result<Vec<Complex64>> {
        let jq = self.theta10(q)?;
        if p.len() != self.dims.r {
            return Err(Error::DimensionMismatch(format!(
                "p has {} entries, expected r = {}",
                p.len(),
                self.dims.r
            )));
        }
        Ok(vec_add(&jq, &self.r_0().mul_vec(p)))
    }

    /// Signal-coordinate covariance block `M22` (r x r).
    pub fn m22(&self) -> HermitianMatrix {
        self.m.principal_block(self.dims.t, self.dims.m())
    }

    /// Cross block `M23` (r x N-m).
    pub fn m23(&self) -> ComplexMatrix {
        self.m
            .off_block(self.dims.t, self.dims.m(), self.dims.m(), self.dims.n)
    }

    /// Trailing block `M33` (N-m x N-m).
    pub fn m33(&self) -> HermitianMatrix {
        self.m.principal_block(self.dims.m(), self.dims.n)
    }

    /// Effective signal-coordinate covariance: the Schur complement
    /// `M22 - M23 M33⁻¹ M32` for m < N, plain `M22` when m = N.
    pub fn interference_schur(&self) -> Result<HermitianMatrix> {
        if self.dims.is_full() {
            Ok(self.m22())
        } else {
            // Schur complement of M33 inside the trailing (r + nm) block.
            let tail = self.m.principal_block(self.dims.t, self.dims.n);
            schur_complement(&tail, self.dims.r)
        }
    }
}

/// Sufficient statistic in canonical coordinates: the rotated primary
/// vector and secondary scatter matrix with their partition sizes.
#[derive(Debug, Clone)]
pub struct SufficientStatistic {
    pub dims: Dims,
    pub z: Vec<Complex64>,
    pub s: HermitianMatrix,
}

impl SufficientStatistic {
    /// Wrap raw components, enforcing shape agreement and positive
    /// definiteness of the scatter matrix.
    pub fn new(dims: Dims, z: Vec<Complex64>, s: HermitianMatrix) -> Result<Self> {
        if z.len() != dims.n || s.dim() != dims.n {
            return Err(Error::DimensionMismatch(format!(
                "z has {} entries, S is {}x{}, expected N = {}",
                z.len(),
                s.dim(),
                s.dim(),
                dims.n
            )));
        }
        if !s.is_positive_definite() {
            return Err(Error::NotPositiveDefinite(
                "scatter matrix S is not positive definite".into(),
            ));
        }
        Ok(Self { dims, z, s })
    }

    pub fn z1(&self) -> &[Complex64] {
        &self.z[..self.dims.t]
    }

    pub fn z2(&self) -> &[Complex64] {
        &self.z[self.dims.t..self.dims.m()]
    }

    pub fn z3(&self) -> &[Complex64] {
        &self.z[self.dims.m()..]
    }

    pub fn s22(&self) -> HermitianMatrix {
        self.s.principal_block(self.dims.t, self.dims.m())
    }

    pub fn s23(&self) -> ComplexMatrix {
        self.s
            .off_block(self.dims.t, self.dims.m(), self.dims.m(), self.dims.n)
    }

    pub fn s33(&self) -> HermitianMatrix {
        self.s.principal_block(self.dims.m(), self.dims.n)
    }
}

/// Compute the canonical form of a scenario: QR of `[J H]`, the
/// completing rotation `U`, and the rotated covariance.
pub fn canonicalize(scenario: &Scenario) -> Result<CanonicalForm> {
    let dims = scenario.params.dims();
    let (n, m) = (dims.n, dims.m());
    let mut jh = ComplexMatrix::zeros(n, m);
    jh.set_block(0, 0, &scenario.j);
    jh.set_block(0, dims.t, &scenario.h);
    let (q_complete, r_full) = qr_full(&jh)?;
    let u = q_complete.adjoint();
    let q_factor = q_complete.block(0, n, 0, m);
    let r_factor = r_full.block(0, m, 0, m);
    let rotated = u.mul(&scenario.m0.to_matrix()).mul(&u.adjoint());
    let m_rot = HermitianMatrix::from_matrix(&rotated, 1e-8)?;
    Ok(CanonicalForm {
        dims,
        u,
        q_factor,
        r_factor,
        m: m_rot,
    })
}

/// Rotate raw primary/secondary data into canonical coordinates and
/// form the sufficient statistic `(z, S)`.
pub fn transform_data(
    cf: &CanonicalForm,
    r_primary: &[Complex64],
    r_secondary: &ComplexMatrix,
) -> Result<SufficientStatistic> {
    let n = cf.dims.n;
    if r_primary.len() != n || r_secondary.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "primary has {} entries, secondary is {}x{}, expected {} rows",
            r_primary.len(),
            r_secondary.rows(),
            r_secondary.cols(),
            n
        )));
    }
    if r_secondary.cols() < n {
        return Err(Error::DimensionMismatch(format!(
            "need K >= N secondary snapshots, got K = {}",
            r_secondary.cols()
        )));
    }
    let z = cf.u.mul_vec(r_primary);
    let zs = cf.u.mul(r_secondary);
    let scatter = zs.mul(&zs.adjoint());
    let s = HermitianMatrix::from_matrix(&scatter, 1e-8)?;
    SufficientStatistic::new(cf.dims, z, s)
}

/// Draw one primary vector and K secondary snapshots from the
/// generative model in original coordinates.
pub fn synthesize_data(
    scenario: &Scenario,
    signal: &SignalParams,
    hypothesis: Hypothesis,
    rng: &mut impl Rng,
) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    let params = &scenario.params;
    if signal.p.len() != params.r || signal.q.len() != params.t {
        return Err(Error::DimensionMismatch(format!(
            "p has {} entries (r = {}), q has {} (t = {})",
            signal.p.len(),
            params.r,
            signal.q.len(),
            params.t
        )));
    }
    let mut mean = scenario.j.mul_vec(&signal.q);
    if hypothesis == Hypothesis::H1 {
        mean = vec_add(&mean, &scenario.h.mul_vec(&signal.p));
    }
    let primary = sample_complex_normal(&mean, &scenario.m0, rng)?;
    let secondary = sample_complex_normal_matrix(&scenario.m0, params.k, rng)?;
    Ok((primary, secondary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vec_norm;
    use crate::rng::{trial_rng, Stream};
    use crate::scenario::Scenario;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn paper_scenario() -> Scenario {
        Scenario::from_steering(
            8,
            12,
            &[0.0, 0.08],
            &[-0.35, -0.2, 0.2, 0.35],
            1.0,
            30.0,
            0.95,
        )
        .unwrap()
    }

    fn zero_signal(scenario: &Scenario) -> SignalParams {
        SignalParams {
            p: vec![Complex64::ZERO; scenario.params.r],
            q: vec![Complex64::ZERO; scenario.params.t],
            target_sinr_db: None,
            inr_db: f64::NEG_INFINITY,
        }
    }

    #[test]
    fn already_canonical_scenario_gives_identity() {
        // J = first t basis columns, H = next r.
        let n = 5;
        let j = ComplexMatrix::from_fn(n, 2, |i, k| {
            if i == k {
                Complex64::ONE
            } else {
                Complex64::ZERO
            }
        });
        let h = ComplexMatrix::from_fn(n, 2, |i, k| {
            if i == k + 2 {
                Complex64::ONE
            } else {
                Complex64::ZERO
            }
        });
        let m0 = HermitianMatrix::identity(n);
        let sc = Scenario::new(6, h, j, m0, 1.0, 0.0, 0.0).unwrap();
        let cf = canonicalize(&sc).unwrap();
        assert!(cf.u.sub(&ComplexMatrix::identity(n)).frobenius_norm() < 1e-12);
        assert!(cf
            .r_factor
            .sub(&ComplexMatrix::identity(4))
            .frobenius_norm()
            < 1e-12);
    }

    #[test]
    fn defining_identities_hold() {
        let sc = paper_scenario();
        let cf = canonicalize(&sc).unwrap();
        let n = sc.params.n;
        // U unitary.
        let uu = cf.u.adjoint().mul(&cf.u);
        assert!(uu.sub(&ComplexMatrix::identity(n)).frobenius_norm() < 1e-10);
        // U Q = [E_t E_r].
        let uq = cf.u.mul(&cf.q_factor);
        let mut selectors = ComplexMatrix::zeros(n, 4 + 2);
        selectors.set_block(0, 0, &cf.e_t());
        selectors.set_block(0, 4, &cf.e_r());
        assert!(uq.sub(&selectors).frobenius_norm() < 1e-10);
        // U J = E_t R_J and U H = E_t R_0 + E_r R_1.
        let uj = cf.u.mul(&sc.j);
        let want_uj = cf.e_t().mul(&cf.r_j());
        assert!(uj.sub(&want_uj).frobenius_norm() < 1e-10);
        let uh = cf.u.mul(&sc.h);
        let want_uh = cf.e_t().mul(&cf.r_0()).add(&cf.e_r().mul(&cf.r_1()));
        assert!(uh.sub(&want_uh).frobenius_norm() < 1e-10);
    }

    #[test]
    fn full_subspace_selectors_cover_identity() {
        // t + r = N: U Q must be the full identity.
        let sc = Scenario::from_steering(
            6,
            8,
            &[0.05, 0.15],
            &[-0.3, -0.15, 0.25, 0.4],
            1.0,
            20.0,
            0.9,
        )
        .unwrap();
        assert!(sc.params.is_full());
        let cf = canonicalize(&sc).unwrap();
        let uq = cf.u.mul(&cf.q_factor);
        assert!(uq.sub(&ComplexMatrix::identity(6)).frobenius_norm() < 1e-10);
    }

    #[test]
    fn transform_preserves_norms_and_scatter_trace() {
        let sc = paper_scenario();
        let cf = canonicalize(&sc).unwrap();
        let mut rng = trial_rng(3, Stream::Verify(10), 0);
        let sig = zero_signal(&sc);
        let (r, rs) = synthesize_data(&sc, &sig, Hypothesis::H0, &mut rng).unwrap();
        let stat = transform_data(&cf, &r, &rs).unwrap();
        assert!((vec_norm(&stat.z) - vec_norm(&r)).abs() < 1e-10 * vec_norm(&r));
        let total: f64 = (0..rs.cols())
            .map(|k| rs.column(k).iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum();
        assert!((stat.s.trace() - total).abs() < 1e-9 * total);
    }

    #[test]
    fn zero_secondary_data_is_flagged() {
        let sc = paper_scenario();
        let cf = canonicalize(&sc).unwrap();
        let z = vec![c(1.0, 0.0); 8];
        let zeros = ComplexMatrix::zeros(8, 12);
        assert!(matches!(
            transform_data(&cf, &z, &zeros),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn synthesis_is_deterministic_under_seed() {
        let sc = paper_scenario();
        let sig = zero_signal(&sc);
        let mut r1 = trial_rng(11, Stream::Verify(11), 7);
        let mut r2 = trial_rng(11, Stream::Verify(11), 7);
        let (a, am) = synthesize_data(&sc, &sig, Hypothesis::H0, &mut r1).unwrap();
        let (b, bm) = synthesize_data(&sc, &sig, Hypothesis::H0, &mut r2).unwrap();
        assert_eq!(a, b);
        assert_eq!(am, bm);
    }

    #[test]
    fn large_signal_dominates_primary() {
        let sc = paper_scenario();
        let mut sig = zero_signal(&sc);
        sig.p = vec![c(1e6, 0.0), c(0.0, 1e6)];
        let mut rng = trial_rng(5, Stream::Verify(12), 0);
        let (r, _) = synthesize_data(&sc, &sig, Hypothesis::H1, &mut rng).unwrap();
        let hp = sc.h.mul_vec(&sig.p);
        let rel = vec_norm(&crate::linalg::vec_sub(&r, &hp)) / vec_norm(&hp);
        assert!(rel < 1e-3, "noise should be negligible, rel = {rel}");
    }

    #[test]
    fn scatter_mean_converges_to_rotated_covariance() {
        // E[S]/K = U M0 U†; the sample check averages the relative
        // Frobenius deviation over seeds.
        let sc = paper_scenario();
        let cf = canonicalize(&sc).unwrap();
        let rotated = cf.m.clone();
        let sig = zero_signal(&sc);
        let seeds = 20u64;
        let mut avg = 0.0;
        for seed in 0..seeds {
            let mut rng = trial_rng(seed, Stream::Verify(14), 0);
            let (r, rs) = synthesize_data(&sc, &sig, Hypothesis::H0, &mut rng).unwrap();
            let stat = transform_data(&cf, &r, &rs).unwrap();
            let dev = stat.s.scale(1.0 / sc.params.k as f64).sub(&rotated);
            avg += dev.frobenius_norm() / sc.m0.frobenius_norm();
        }
        avg /= seeds as f64;
        let bound = 5.0 / (sc.params.k as f64).sqrt();
        assert!(avg <= bound, "average deviation {avg} vs bound {bound}");
    }

    #[test]
    fn theta2_vanishes_iff_p_vanishes() {
        let sc = paper_scenario();
        let cf = canonicalize(&sc).unwrap();
        assert!(vec_norm(&cf.theta2(&[Complex64::ZERO; 2]).unwrap()) == 0.0);
        for p in [
            vec![c(1e-6, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, -1e-9)],
            vec![c(0.3, 0.1), c(-0.2, 0.9)],
        ] {
            assert!(vec_norm(&cf.theta2(&p).unwrap()) > 0.0);
        }
    }

    #[test]
    fn primary_sample_mean_obeys_clt_bound() {
        let sc = Scenario::new(
            4,
            ComplexMatrix::from_fn(4, 1, |i, _| if i == 1 { Complex64::ONE } else { Complex64::ZERO }),
            ComplexMatrix::from_fn(4, 1, |i, _| if i == 0 { Complex64::ONE } else { Complex64::ZERO }),
            HermitianMatrix::identity(4),
            1.0,
            0.0,
            0.0,
        )
        .unwrap();
        let sig = SignalParams {
            p: vec![Complex64::ZERO],
            q: vec![Complex64::ZERO],
            target_sinr_db: None,
            inr_db: f64::NEG_INFINITY,
        };
        let trials = 100_000usize;
        let mut mean = vec![Complex64::ZERO; 4];
        let mut rng = trial_rng(17, Stream::Verify(13), 0);
        for _ in 0..trials {
            let (r, _) = synthesize_data(&sc, &sig, Hypothesis::H0, &mut rng).unwrap();
            for (m, v) in mean.iter_mut().zip(&r) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= trials as f64;
        }
        let bound = 4.0 * (4.0 / trials as f64).sqrt();
        assert!(vec_norm(&mean) <= bound, "{} > {bound}", vec_norm(&mean));
    }
}
