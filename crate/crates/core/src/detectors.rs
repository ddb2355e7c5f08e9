//! Invariant detector statistics: the clairvoyant most-powerful
//! invariant detector (MPID), its zero-SINR limit (LMPID), the GLRT,
//! the two-step GLRT, and the energy detector for the full-subspace
//! case. All of them reject H0 for large values of the statistic.
//!
//! The GLRT, 2S-GLRT, and ED admit two algebraic routes: a raw-data
//! projection form and a closed form in the maximal invariant. The
//! raw-data entry points evaluate both and insist they agree, which
//! doubles as a shipped self-check of the reduction chain.

use crate::canonical::SufficientStatistic;
use crate::distributions::ln_confluent_sum;
use crate::error::{Error, Result};
use crate::invariant::{compute_maximal_invariant, MaximalInvariant};
use crate::linalg::{hermitian_inv_sqrt, inner, vec_sub, HermitianMatrix};
use crate::Params;

/// Detector family tag. The MPID carries its clairvoyant SINR
/// parameter; it is a benchmark, not a practical receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorKind {
    Mpid { sinr: f64 },
    Lmpid,
    Glrt,
    TwoStepGlrt,
    Ed,
}

impl DetectorKind {
    pub fn label(&self) -> &'static str {
        match self {
            DetectorKind::Mpid { .. } => "mpid",
            DetectorKind::Lmpid => "lmpid",
            DetectorKind::Glrt => "glrt",
            DetectorKind::TwoStepGlrt => "2s-glrt",
            DetectorKind::Ed => "ed",
        }
    }

    /// Evaluate the statistic as a function of the maximal invariant,
    /// in the exceedance form the closed-form probabilities are
    /// written for: every detector rejects H0 when the value exceeds
    /// its threshold. For the GLRT that is `(1 - p1)/p1`, the monotone
    /// equivalent of the likelihood-ratio form `1/p1`.
    pub fn evaluate(&self, inv: &MaximalInvariant, params: &Params) -> Result<f64> {
        match (self, inv) {
            (DetectorKind::Mpid { sinr }, _) => mpid_statistic(inv, params, *sinr),
            (DetectorKind::Lmpid, _) => lmpid_statistic(inv, params),
            (DetectorKind::Glrt, MaximalInvariant::Split { p1, .. }) => Ok((1.0 - p1) / p1),
            (DetectorKind::Glrt, MaximalInvariant::Full { p3 })
            | (DetectorKind::TwoStepGlrt, MaximalInvariant::Full { p3 })
            | (DetectorKind::Ed, MaximalInvariant::Full { p3 }) => Ok((1.0 - p3) / p3),
            (DetectorKind::TwoStepGlrt, MaximalInvariant::Split { p1, p2, .. }) => {
                Ok((1.0 - p1) / (p1 * p2))
            }
            (DetectorKind::Ed, MaximalInvariant::Split { .. }) => Err(Error::DomainError(
                "energy detector requires m = N".into(),
            )),
        }
    }
}

/// Upper summation limit of the likelihood-ratio series: the first
/// complex dof of the conditional beta law.
fn series_dof(inv: &MaximalInvariant, params: &Params) -> Result<usize> {
    match inv {
        MaximalInvariant::Split { .. } => {
            if params.is_full() {
                return Err(Error::DomainError(
                    "split invariant with full-subspace params".into(),
                ));
            }
            Ok(params.k - (params.n - params.t) + 1)
        }
        MaximalInvariant::Full { .. } => {
            if !params.is_full() {
                return Err(Error::DomainError(
                    "full invariant with split params".into(),
                ));
            }
            Ok(params.k - params.r + 1)
        }
    }
}

/// Most powerful invariant detector at the given SINR: the likelihood
/// ratio of the maximal-invariant densities. Evaluated through a
/// log-space term recurrence so large SINR values neither overflow the
/// binomials nor underflow the exponential prefactor.
pub fn mpid_statistic(inv: &MaximalInvariant, params: &Params, sinr: f64) -> Result<f64> {
    if sinr < 0.0 {
        return Err(Error::DomainError(format!("sinr must be >= 0, got {sinr}")));
    }
    let n_dof = series_dof(inv, params)?;
    let (arg, damp) = match inv {
        MaximalInvariant::Split { p1, p2, .. } => {
            check_unit_interval(*p1, "p1")?;
            check_unit_interval(*p2, "p2")?;
            (sinr * p2 * (1.0 - p1), sinr * p1 * p2)
        }
        MaximalInvariant::Full { p3 } => {
            check_unit_interval(*p3, "p3")?;
            (sinr * (1.0 - p3), sinr * p3)
        }
    };
    Ok((ln_confluent_sum(n_dof, params.r, arg) - damp).exp())
}

fn check_unit_interval(x: f64, name: &str) -> Result<()> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!("{name} = {x} outside (0, 1]")))
    }
}

/// Coefficient `a = [K - (N - t) + 1]/r` of the LMPID.
pub fn lmpid_coefficient(params: &Params) -> f64 {
    (params.k - (params.n - params.t) + 1) as f64 / params.r as f64
}

/// Locally most powerful invariant detector (zero-SINR slope of the
/// MPID). Split case: `a p2 (1 - p1) - p1 p2`, bounded in [-1, a].
pub fn lmpid_statistic(inv: &MaximalInvariant, params: &Params) -> Result<f64> {
    match inv {
        MaximalInvariant::Split { p1, p2, .. } => {
            check_unit_interval(*p1, "p1")?;
            check_unit_interval(*p2, "p2")?;
            if params.is_full() {
                return Err(Error::DomainError(
                    "split invariant with full-subspace params".into(),
                ));
            }
            let a = lmpid_coefficient(params);
            Ok(a * p2 * (1.0 - p1) - p1 * p2)
        }
        MaximalInvariant::Full { p3 } => {
            check_unit_interval(*p3, "p3")?;
            let a = (params.k - params.r + 1) as f64 / params.r as f64;
            Ok(a * (1.0 - p3) - p3)
        }
    }
}

/// The two whitened-projection quadratic forms of the raw-data GLRT:
/// `z† S^{-1/2} P⊥_{S^{-1/2}E_t} S^{-1/2} z` and the same with `E_m`.
pub fn glrt_projection_forms(stat: &SufficientStatistic) -> Result<(f64, f64)> {
    let s_inv_sqrt = hermitian_inv_sqrt(&stat.s).map_err(|_| {
        Error::SingularBlock("scatter matrix not positive definite".into())
    })?;
    let v = s_inv_sqrt.to_matrix().mul_vec(&stat.z);
    let q_t = residual_energy(&s_inv_sqrt, &v, stat.dims.t)?;
    let q_m = residual_energy(&s_inv_sqrt, &v, stat.dims.m())?;
    Ok((q_t, q_m))
}

/// Energy of `v` after projecting out the span of the first `cols`
/// columns of `S^{-1/2}` (the whitened selector subspace).
fn residual_energy(
    s_inv_sqrt: &HermitianMatrix,
    v: &[num_complex::Complex64],
    cols: usize,
) -> Result<f64> {
    let n = s_inv_sqrt.dim();
    if cols == n {
        // Whitened selector spans everything: projection removes all energy.
        return Ok(0.0);
    }
    let a = s_inv_sqrt.to_matrix().block(0, n, 0, cols);
    let gram = HermitianMatrix::from_matrix(&a.adjoint().mul(&a), 1e-8)?;
    let ahv = a.adjoint().mul_vec(v);
    let coeffs = gram
        .solve_vec(&ahv)
        .map_err(|_| Error::SingularBlock("projection Gram matrix singular".into()))?;
    let projected = a.mul_vec(&coeffs);
    let residual = vec_sub(v, &projected);
    Ok(inner(&residual, &residual).re.max(0.0))
}

const SELF_CHECK_TOL: f64 = 1e-9;

fn self_check(label: &str, raw: f64, invariant_form: f64) -> Result<f64> {
    let diff = (raw - invariant_form).abs();
    if diff <= SELF_CHECK_TOL * (1.0 + raw.abs().max(invariant_form.abs())) {
        Ok(invariant_form)
    } else {
        Err(Error::SelfCheckFailed(format!(
            "{label}: raw form {raw} vs invariant form {invariant_form}"
        )))
    }
}

/// GLRT from raw data. Computes both the projection ratio and the
/// invariant form (`1/p1` for m < N, the energy form for m = N),
/// checks agreement, and returns the invariant form.
pub fn glrt_statistic(stat: &SufficientStatistic) -> Result<f64> {
    let (q_t, q_m) = glrt_projection_forms(stat)?;
    let inv = compute_maximal_invariant(stat)?;
    match inv {
        MaximalInvariant::Split { p1, .. } => {
            self_check("glrt", (1.0 + q_t) / (1.0 + q_m), 1.0 / p1)
        }
        MaximalInvariant::Full { p3 } => self_check("glrt(m=N)", q_t, (1.0 - p3) / p3),
    }
}

/// Two-step GLRT from raw data: difference of the projection forms,
/// checked against `(1 - p1)/(p1 p2)`.
pub fn two_step_glrt_statistic(stat: &SufficientStatistic) -> Result<f64> {
    let (q_t, q_m) = glrt_projection_forms(stat)?;
    let inv = compute_maximal_invariant(stat)?;
    match inv {
        MaximalInvariant::Split { p1, p2, .. } => {
            self_check("2s-glrt", q_t - q_m, (1.0 - p1) / (p1 * p2))
        }
        MaximalInvariant::Full { p3 } => self_check("2s-glrt(m=N)", q_t, (1.0 - p3) / p3),
    }
}

/// Energy detector for the full-subspace case: `z2† S22⁻¹ z2`, checked
/// against `(1 - p3)/p3`.
pub fn ed_statistic(stat: &SufficientStatistic) -> Result<f64> {
    if !stat.dims.is_full() {
        return Err(Error::DomainError(
            "energy detector requires m = N".into(),
        ));
    }
    let x = stat
        .s22()
        .solve_vec(stat.z2())
        .map_err(|_| Error::SingularBlock("S22 not invertible".into()))?;
    let raw = inner(stat.z2(), &x).re;
    let p3 = compute_maximal_invariant(stat)?.p3()?;
    self_check("ed", raw, (1.0 - p3) / p3)
}

/// Structural check that the conditionally most powerful invariant
/// statistic is nonincreasing in p1 at fixed p2 for every SINR in the
/// grid (so thresholding small p1 — the GLRT — realizes it).
pub fn cmpid_direction_check(params: &Params, sinr_grid: &[f64]) -> Result<bool> {
    if params.is_full() {
        return Err(Error::DomainError(
            "conditional check applies to m < N".into(),
        ));
    }
    let steps = 1000;
    for &sinr in sinr_grid {
        for &p2 in &[0.05, 0.3, 0.7, 1.0] {
            let mut prev = f64::INFINITY;
            for i in 1..=steps {
                let p1 = i as f64 / steps as f64;
                let inv = MaximalInvariant::Split {
                    m1: 0.0,
                    m2: 0.0,
                    p1,
                    p2,
                };
                let val = mpid_statistic(&inv, params, sinr)?;
                if val > prev * (1.0 + 1e-12) + 1e-12 {
                    return Ok(false);
                }
                prev = val;
            }
        }
    }
    Ok(true)
}
