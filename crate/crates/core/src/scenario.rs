//! Simulated radar environment: signal/jammer steering subspaces,
//! exponentially correlated clutter covariance, and the power
//! calibration helpers that pin SINR and INR to target values.

use num_complex::Complex64;

use crate::canonical::CanonicalForm;
use crate::error::{Error, Result};
use crate::linalg::{qr_decompose, vec_scale, ComplexMatrix, HermitianMatrix};
use crate::{db_to_linear, Params};

/// Problem geometry and nuisance truth for one experiment.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: Params,
    /// Target steering subspace, N x r.
    pub h: ComplexMatrix,
    /// Jammer steering subspace, N x t.
    pub j: ComplexMatrix,
    /// Clutter-plus-noise covariance, N x N positive definite.
    pub m0: HermitianMatrix,
    /// Thermal noise power (linear).
    pub sigma_n2: f64,
    /// Clutter power (linear).
    pub sigma_c2: f64,
    /// One-lag clutter correlation coefficient in [0, 1).
    pub one_lag_corr: f64,
}

/// Location parameters for one synthesized cell under test.
#[derive(Debug, Clone)]
pub struct SignalParams {
    /// Target coordinates in the signal subspace (r entries).
    pub p: Vec<Complex64>,
    /// Jammer coordinates in the interference subspace (t entries).
    pub q: Vec<Complex64>,
    /// SINR the signal was calibrated to, if any (dB).
    pub target_sinr_db: Option<f64>,
    /// Jammer power target (dB); `-inf` means no jammer.
    pub inr_db: f64,
}

impl Scenario {
    pub fn new(
        k: usize,
        h: ComplexMatrix,
        j: ComplexMatrix,
        m0: HermitianMatrix,
        sigma_n2: f64,
        sigma_c2: f64,
        one_lag_corr: f64,
    ) -> Result<Self> {
        let n = h.rows();
        if j.rows() != n || m0.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "H has {} rows, J has {}, M0 is {}x{}",
                n,
                j.rows(),
                m0.dim(),
                m0.dim()
            )));
        }
        let params = Params::new(n, k, h.cols(), j.cols())?;
        // [J H] must have full column rank.
        let mut jh = ComplexMatrix::zeros(n, params.m());
        jh.set_block(0, 0, &j);
        jh.set_block(0, params.t, &h);
        qr_decompose(&jh)?;
        m0.cholesky()
            .map_err(|_| Error::NotPositiveDefinite("M0 must be positive definite".into()))?;
        Ok(Self {
            params,
            h,
            j,
            m0,
            sigma_n2,
            sigma_c2,
            one_lag_corr,
        })
    }

    /// Doppler-steering construction: subspaces from normalized
    /// frequencies, clutter covariance from the exponential model.
    #[allow(clippy::too_many_arguments)]
    pub fn from_steering(
        n: usize,
        k: usize,
        signal_frequencies: &[f64],
        jammer_frequencies: &[f64],
        sigma_n2: f64,
        cnr_db: f64,
        one_lag_corr: f64,
    ) -> Result<Self> {
        let h = build_steering_subspace(n, signal_frequencies)?;
        let j = build_steering_subspace(n, jammer_frequencies)?;
        let sigma_c2 = sigma_n2 * db_to_linear(cnr_db);
        let m0 = build_clutter_covariance(n, sigma_n2, sigma_c2, one_lag_corr)?;
        Self::new(k, h, j, m0, sigma_n2, sigma_c2, one_lag_corr)
    }
}

/// Clutter-plus-noise covariance `σ_n² I + σ_c² M_c` with
/// `(M_c)_{ij} = ρ^{|i-j|}`.
pub fn build_clutter_covariance(
    n: usize,
    sigma_n2: f64,
    sigma_c2: f64,
    one_lag_corr: f64,
) -> Result<HermitianMatrix> {
    if sigma_n2 <= 0.0 || sigma_c2 < 0.0 {
        return Err(Error::DomainError(format!(
            "need sigma_n2 > 0 and sigma_c2 >= 0, got {sigma_n2}, {sigma_c2}"
        )));
    }
    if !(0.0..1.0).contains(&one_lag_corr) {
        return Err(Error::DomainError(format!(
            "one-lag correlation {one_lag_corr} outside [0, 1)"
        )));
    }
    Ok(HermitianMatrix::from_fn_lower(n, |i, j| {
        let clutter = sigma_c2 * one_lag_corr.powi((i - j) as i32);
        let noise = if i == j { sigma_n2 } else { 0.0 };
        Complex64::new(noise + clutter, 0.0)
    }))
}

/// Unit-norm Doppler steering columns at the given normalized
/// frequencies: column k is `(1, e^{j2πf}, ..., e^{j2πf(N-1)})ᵀ/√N`.
pub fn build_steering_subspace(n: usize, frequencies: &[f64]) -> Result<ComplexMatrix> {
    if frequencies.is_empty() {
        return Err(Error::DomainError("need at least one frequency".into()));
    }
    for (a, &fa) in frequencies.iter().enumerate() {
        if !(-0.5..0.5).contains(&fa) {
            return Err(Error::DomainError(format!(
                "frequency {fa} outside [-0.5, 0.5)"
            )));
        }
        for &fb in &frequencies[a + 1..] {
            if (fa - fb).abs() < 1e-12 {
                return Err(Error::DuplicateFrequency(format!("{fa} repeated")));
            }
        }
    }
    let scale = 1.0 / (n as f64).sqrt();
    Ok(ComplexMatrix::from_fn(n, frequencies.len(), |row, col| {
        let phase = 2.0 * std::f64::consts::PI * frequencies[col] * row as f64;
        Complex64::from_polar(scale, phase)
    }))
}

/// SINR of a canonical-coordinate signal vector θ2:
/// `θ2† (M22 - M23 M33⁻¹ M32)⁻¹ θ2` for m < N, `θ2† M22⁻¹ θ2` for m = N.
pub fn compute_sinr(cf: &CanonicalForm, theta2: &[Complex64]) -> Result<f64> {
    if theta2.len() != cf.dims.r {
        return Err(Error::DimensionMismatch(format!(
            "theta2 has {} entries, expected r = {}",
            theta2.len(),
            cf.dims.r
        )));
    }
    let schur = cf.interference_schur()?;
    let x = schur
        .solve_vec(theta2)
        .map_err(|_| Error::SingularBlock("M Schur complement not invertible".into()))?;
    let sinr = crate::linalg::inner(theta2, &x).re;
    Ok(sinr.max(0.0))
}

/// Scale a signal-subspace direction `p` so the induced θ2 = R_1 p has
/// exactly the target SINR. The quadratic form scales with |α|², so a
/// single real factor suffices.
pub fn scale_signal_to_sinr(
    cf: &CanonicalForm,
    direction: &[Complex64],
    target_sinr: f64,
) -> Result<Vec<Complex64>> {
    if target_sinr < 0.0 {
        return Err(Error::DomainError(format!(
            "target SINR must be >= 0, got {target_sinr}"
        )));
    }
    let norm: f64 = direction.iter().map(|c| c.norm_sqr()).sum();
    if norm == 0.0 {
        return Err(Error::ZeroDirection);
    }
    if target_sinr == 0.0 {
        return Ok(vec![Complex64::ZERO; direction.len()]);
    }
    let theta2 = cf.theta2(direction)?;
    let base = compute_sinr(cf, &theta2)?;
    if base <= 0.0 {
        return Err(Error::ZeroDirection);
    }
    let alpha = (target_sinr / base).sqrt();
    Ok(vec_scale(direction, Complex64::new(alpha, 0.0)))
}

/// Scale a jammer-subspace direction `q` so the H0 interference
/// coordinate θ1 = R_J q satisfies `‖θ1‖²/σ_n² = 10^{inr_db/10}`.
/// `inr_db = -inf` requests a zero jammer.
pub fn scale_jammer_to_inr(
    scenario: &Scenario,
    cf: &CanonicalForm,
    q_direction: &[Complex64],
    inr_db: f64,
) -> Result<Vec<Complex64>> {
    if inr_db == f64::NEG_INFINITY {
        return Ok(vec![Complex64::ZERO; q_direction.len()]);
    }
    let norm: f64 = q_direction.iter().map(|c| c.norm_sqr()).sum();
    if norm == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let theta1 = cf.theta10(q_direction)?;
    let theta1_norm2: f64 = theta1.iter().map(|c| c.norm_sqr()).sum();
    if theta1_norm2 == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let target = scenario.sigma_n2 * db_to_linear(inr_db);
    let beta = (target / theta1_norm2).sqrt();
    Ok(vec_scale(q_direction, Complex64::new(beta, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::canonicalize;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn paper_scenario() -> Scenario {
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

    #[test]
    fn clutter_covariance_trivial_and_paper_values() {
        let m = build_clutter_covariance(4, 1.5, 0.0, 0.9).unwrap();
        assert!(m
            .sub(&HermitianMatrix::from_diagonal(&[1.5; 4]))
            .frobenius_norm()
            < 1e-14);
        // CNR = 30 dB, rho = 0.95, N = 2.
        let m = build_clutter_covariance(2, 1.0, 1000.0, 0.95).unwrap();
        assert!((m.get(0, 0).re - 1001.0).abs() < 1e-10);
        assert!((m.get(1, 0).re - 950.0).abs() < 1e-10);
        assert!((m.get(1, 1).re - 1001.0).abs() < 1e-10);
    }

    #[test]
    fn clutter_covariance_is_toeplitz_and_pd() {
        for n in [2usize, 4, 8, 16] {
            for rho in [0.0, 0.5, 0.95, 0.99] {
                let m = build_clutter_covariance(n, 1.0, 1000.0, rho).unwrap();
                assert!(m.is_positive_definite(), "n={n}, rho={rho}");
                for i in 1..n {
                    for j in 1..=i {
                        assert!((m.get(i, j) - m.get(i - 1, j - 1)).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn steering_trivial_columns() {
        let m = build_steering_subspace(4, &[0.0]).unwrap();
        for i in 0..4 {
            assert!((m[(i, 0)] - c(0.5, 0.0)).norm() < 1e-14);
        }
        let m = build_steering_subspace(2, &[-0.5]).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((m[(0, 0)] - c(s, 0.0)).norm() < 1e-14);
        assert!((m[(1, 0)] - c(-s, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn steering_rank_for_distinct_frequencies() {
        let m = build_steering_subspace(8, &[0.0, 0.1, 0.2]).unwrap();
        let (_, r) = qr_decompose(&m).unwrap();
        for k in 0..3 {
            assert!(r[(k, k)].re > 1e-3, "diagonal {k} too small");
        }
    }

    #[test]
    fn steering_rejects_duplicates_and_out_of_range() {
        assert!(matches!(
            build_steering_subspace(4, &[0.1, 0.1]),
            Err(Error::DuplicateFrequency(_))
        ));
        assert!(build_steering_subspace(4, &[0.6]).is_err());
    }

    #[test]
    fn sinr_zero_iff_zero_signal() {
        let sc = paper_scenario();
        let cf = canonicalize(&sc).unwrap();
        assert_eq!(compute_sinr(&cf, &[Complex64::ZERO; 2]).unwrap(), 0.0);
        let s = compute_sinr(&cf, &[c(1.0, 0.0), c(0.0, -1.0)]).unwrap();
        assert!(s > 0.0);
    }

    #[test]
    fn sinr_is_phase_invariant() {
        let sc = paper_scenario();
        let cf = canonicalize(&sc).unwrap();
        let theta = vec![c(1.0, 0.5), c(-0.3, 0.2)];
        let base = compute_sinr(&cf, &theta).unwrap();
        for phi in [0.3, 1.1, 2.9] {
            let rotated = vec_scale(&theta, Complex64::from_polar(1.0, phi));
            let s = compute_sinr(&cf, &rotated).unwrap();
            assert!((s - base).abs() < 1e-10 * base);
        }
    }

    #[test]
    fn scale_signal_round_trips() {
        let sc = paper_scenario();
        let cf = canonicalize(&sc).unwrap();
        let dir = vec![c(0.7, -0.1), c(0.2, 0.4)];
        for target in [10.0, 39.810717055349734, 1e-3] {
            let p = scale_signal_to_sinr(&cf, &dir, target).unwrap();
            let got = compute_sinr(&cf, &cf.theta2(&p).unwrap()).unwrap();
            assert!(
                (got - target).abs() <= 1e-10 * target,
                "target {target}, got {got}"
            );
        }
        let zero = scale_signal_to_sinr(&cf, &dir, 0.0).unwrap();
        assert!(zero.iter().all(|v| v.norm() == 0.0));
        assert!(matches!(
            scale_signal_to_sinr(&cf, &[Complex64::ZERO; 2], 1.0),
            Err(Error::ZeroDirection)
        ));
    }

    #[test]
    fn scale_jammer_hits_inr() {
        let sc = paper_scenario();
        let cf = canonicalize(&sc).unwrap();
        let dir = vec![c(1.0, 0.0), c(0.0, 1.0), c(-0.5, 0.2), c(0.1, 0.1)];
        let q = scale_jammer_to_inr(&sc, &cf, &dir, 30.0).unwrap();
        let theta1 = cf.theta10(&q).unwrap();
        let ratio: f64 = theta1.iter().map(|v| v.norm_sqr()).sum::<f64>() / sc.sigma_n2;
        assert!((ratio - 1000.0).abs() <= 1e-9 * 1000.0, "ratio {ratio}");
        let off = scale_jammer_to_inr(&sc, &cf, &dir, f64::NEG_INFINITY).unwrap();
        assert!(off.iter().all(|v| v.norm() == 0.0));
    }
}
