//! Closed-form false-alarm and detection probabilities for the GLRT,
//! the 2S-GLRT, the LMPID (m < N) and the energy detector (m = N),
//! plus threshold inversion. These are the analytic counterpart of the
//! Monte Carlo engine.
//!
//! The GLRT and ED false-alarm probabilities are finite sums; the
//! remaining quantities are beta-weighted integrals of the complex F
//! CDF over the ancillary variable, evaluated by adaptive
//! Gauss-Legendre quadrature with the integration domain split at the
//! known kink of the LMPID integrand.

use serde::{Deserialize, Serialize};

use crate::detectors::{lmpid_coefficient, DetectorKind};
use crate::distributions::{complex_beta_pdf, complex_f_cdf, ln_choose, ComplexDof};
use crate::error::{Error, Result};
use crate::quad;
use crate::Params;

/// One calibrated point on a detector operating curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub detector: String,
    pub eta: f64,
    pub pfa: f64,
    pub sinr_db: Option<f64>,
    pub pd: Option<f64>,
}

fn require_split(params: &Params) -> Result<()> {
    params.validate()?;
    if params.is_full() {
        return Err(Error::DomainError(
            "m = N is handled by the energy detector formulas".into(),
        ));
    }
    Ok(())
}

fn require_nonnegative(eta: f64) -> Result<()> {
    if eta < 0.0 {
        return Err(Error::DomainError(format!("threshold must be >= 0, got {eta}")));
    }
    Ok(())
}

/// Numerator/denominator complex dof of the conditional GLRT law.
fn glrt_dof(params: &Params) -> (usize, usize) {
    (params.r, params.k - (params.n - params.t) + 1)
}

/// Beta weight of the ancillary variable `p2`.
fn ancillary_pdf(params: &Params, u: f64) -> f64 {
    let first = params.k - (params.n - params.t) + params.r + 1;
    let second = params.n - params.t - params.r;
    complex_beta_pdf(u, first, second).unwrap_or(0.0)
}

/// GLRT false-alarm probability:
/// `(1+η)^{-(r+K-N+t)} Σ_{l<r} C(r+K-N+t, l) η^l`, evaluated in log
/// space so huge thresholds underflow gracefully.
pub fn pfa_glrt(eta: f64, params: &Params) -> Result<f64> {
    require_split(params)?;
    require_nonnegative(eta)?;
    if eta == 0.0 {
        return Ok(1.0);
    }
    let exponent = params.r + params.k - params.n + params.t;
    let ln_one_plus = (1.0 + eta).ln();
    let ln_eta = eta.ln();
    let mut sum = 0.0;
    for l in 0..params.r {
        sum += (ln_choose(exponent, l) + l as f64 * ln_eta - exponent as f64 * ln_one_plus).exp();
    }
    Ok(sum.min(1.0))
}

/// GLRT detection probability: `1 - ∫ F(η; r, K-(N-t)+1, δ(u)) f_β(u) du`
/// with `δ²(u) = u · SINR`.
pub fn pd_glrt(eta: f64, params: &Params, sinr: f64) -> Result<f64> {
    require_split(params)?;
    require_nonnegative(eta)?;
    if sinr < 0.0 {
        return Err(Error::DomainError(format!("sinr must be >= 0, got {sinr}")));
    }
    let (num, den) = glrt_dof(params);
    let integral = quad::integrate_adaptive(0.0, 1.0, |u| {
        complex_f_cdf(eta, &ComplexDof::noncentral(num, den, u * sinr)) * ancillary_pdf(params, u)
    })?;
    Ok((1.0 - integral).clamp(0.0, 1.0))
}

/// 2S-GLRT false-alarm probability (the zero-SINR detection formula).
pub fn pfa_2sglrt(eta: f64, params: &Params) -> Result<f64> {
    pd_2sglrt(eta, params, 0.0)
}

/// 2S-GLRT detection probability:
/// `1 - ∫ F(η u; r, K-(N-t)+1, δ(u)) f_β(u) du`.
pub fn pd_2sglrt(eta: f64, params: &Params, sinr: f64) -> Result<f64> {
    require_split(params)?;
    require_nonnegative(eta)?;
    if sinr < 0.0 {
        return Err(Error::DomainError(format!("sinr must be >= 0, got {sinr}")));
    }
    let (num, den) = glrt_dof(params);
    let integral = quad::integrate_adaptive(0.0, 1.0, |u| {
        complex_f_cdf(eta * u, &ComplexDof::noncentral(num, den, u * sinr))
            * ancillary_pdf(params, u)
    })?;
    Ok((1.0 - integral).clamp(0.0, 1.0))
}

/// LMPID false-alarm probability, piecewise over the support [-1, a].
pub fn pfa_lmpid(eta: f64, params: &Params) -> Result<f64> {
    lmpid_probability(eta, params, 0.0)
}

/// LMPID detection probability; identical branch structure with the
/// noncentrality δ²(u) = u · SINR inside the F CDF.
pub fn pd_lmpid(eta: f64, params: &Params, sinr: f64) -> Result<f64> {
    lmpid_probability(eta, params, sinr)
}

fn lmpid_probability(eta: f64, params: &Params, sinr: f64) -> Result<f64> {
    require_split(params)?;
    if sinr < 0.0 {
        return Err(Error::DomainError(format!("sinr must be >= 0, got {sinr}")));
    }
    let a = lmpid_coefficient(params);
    let (num, den) = glrt_dof(params);
    let f = |u: f64, x: f64| complex_f_cdf(x, &ComplexDof::noncentral(num, den, u * sinr));
    if eta > a {
        return Ok(0.0);
    }
    if eta < -1.0 {
        return Ok(1.0);
    }
    if eta > 0.0 {
        // Exceedance branch above the kink u = η/a, plus the printed
        // complement branch below it (where the F argument is negative
        // and the CDF vanishes).
        let kink = eta / a;
        let upper = quad::integrate_adaptive(kink.min(1.0), 1.0, |u| {
            (1.0 - f(u, (u + eta) / (u * a - eta))) * ancillary_pdf(params, u)
        })?;
        let lower = quad::integrate_adaptive(0.0, kink.min(1.0), |u| {
            f(u, (u + eta) / (u * a - eta)) * ancillary_pdf(params, u)
        })?;
        Ok((upper + lower).clamp(0.0, 1.0))
    } else {
        // -1 <= eta <= 0: the argument crosses zero at u = -eta.
        let integral = quad::integrate_adaptive_split(0.0, 1.0, &[-eta], |u| {
            f(u, (u + eta) / (u * a - eta)) * ancillary_pdf(params, u)
        })?;
        Ok((1.0 - integral).clamp(0.0, 1.0))
    }
}

/// Energy detector false-alarm probability (m = N):
/// `(1+η)^{-K} Σ_{l<r} C(K, l) η^l`.
pub fn pfa_ed(eta: f64, k: usize, r: usize) -> Result<f64> {
    if r < 1 || k < r + 1 {
        return Err(Error::DomainError(format!("need k >= r + 1, got k={k}, r={r}")));
    }
    require_nonnegative(eta)?;
    if eta == 0.0 {
        return Ok(1.0);
    }
    let ln_one_plus = (1.0 + eta).ln();
    let ln_eta = eta.ln();
    let mut sum = 0.0;
    for l in 0..r {
        sum += (ln_choose(k, l) + l as f64 * ln_eta - k as f64 * ln_one_plus).exp();
    }
    Ok(sum.min(1.0))
}

/// Energy detector detection probability (m = N):
/// `1 - F(η; r, K-r+1, δ)` with `δ² = SINR`.
pub fn pd_ed(eta: f64, k: usize, r: usize, sinr: f64) -> Result<f64> {
    if r < 1 || k < r + 1 {
        return Err(Error::DomainError(format!("need k >= r + 1, got k={k}, r={r}")));
    }
    require_nonnegative(eta)?;
    if sinr < 0.0 {
        return Err(Error::DomainError(format!("sinr must be >= 0, got {sinr}")));
    }
    Ok((1.0 - complex_f_cdf(eta, &ComplexDof::noncentral(r, k - r + 1, sinr))).clamp(0.0, 1.0))
}

/// False-alarm probability of a detector at a threshold, routed to the
/// matching closed form. The MPID has none.
pub fn pfa(detector: &DetectorKind, eta: f64, params: &Params) -> Result<f64> {
    match detector {
        DetectorKind::Glrt => {
            if params.is_full() {
                pfa_ed(eta, params.k, params.r)
            } else {
                pfa_glrt(eta, params)
            }
        }
        DetectorKind::TwoStepGlrt => {
            if params.is_full() {
                pfa_ed(eta, params.k, params.r)
            } else {
                pfa_2sglrt(eta, params)
            }
        }
        DetectorKind::Lmpid => {
            if params.is_full() {
                // Affine in the ED statistic: a(1 - p3) - p3 > η is
                // (1-p3)/p3 ... mapped through the ED law.
                let a = (params.k - params.r + 1) as f64 / params.r as f64;
                let p3_threshold = (a - eta) / (a + 1.0);
                if p3_threshold <= 0.0 {
                    return Ok(0.0);
                }
                let ed_eta = (1.0 - p3_threshold) / p3_threshold;
                pfa_ed(ed_eta.max(0.0), params.k, params.r)
            } else {
                pfa_lmpid(eta, params)
            }
        }
        DetectorKind::Ed => pfa_ed(eta, params.k, params.r),
        DetectorKind::Mpid { .. } => Err(Error::DomainError(
            "the MPID has no closed-form false-alarm probability".into(),
        )),
    }
}

/// Detection probability of a detector at a threshold and SINR, routed
/// to the matching closed form. The MPID has none.
pub fn pd(detector: &DetectorKind, eta: f64, params: &Params, sinr: f64) -> Result<f64> {
    match detector {
        DetectorKind::Glrt => {
            if params.is_full() {
                pd_ed(eta, params.k, params.r, sinr)
            } else {
                pd_glrt(eta, params, sinr)
            }
        }
        DetectorKind::TwoStepGlrt => {
            if params.is_full() {
                pd_ed(eta, params.k, params.r, sinr)
            } else {
                pd_2sglrt(eta, params, sinr)
            }
        }
        DetectorKind::Lmpid => {
            if params.is_full() {
                let a = (params.k - params.r + 1) as f64 / params.r as f64;
                let p3_threshold = (a - eta) / (a + 1.0);
                if p3_threshold <= 0.0 {
                    return Ok(0.0);
                }
                let ed_eta = (1.0 - p3_threshold) / p3_threshold;
                pd_ed(ed_eta.max(0.0), params.k, params.r, sinr)
            } else {
                pd_lmpid(eta, params, sinr)
            }
        }
        DetectorKind::Ed => pd_ed(eta, params.k, params.r, sinr),
        DetectorKind::Mpid { .. } => Err(Error::DomainError(
            "the MPID detection probability is Monte Carlo only".into(),
        )),
    }
}

/// Invert the false-alarm probability for a threshold by bisection on
/// the monotone pfa curve. `target = 1` returns the lower end of the
/// support, where the probability first reaches one.
pub fn invert_threshold(detector: &DetectorKind, params: &Params, target_pfa: f64) -> Result<f64> {
    if !(target_pfa > 0.0 && target_pfa <= 1.0) {
        return Err(Error::NotBracketable(format!(
            "target pfa {target_pfa} outside (0, 1]"
        )));
    }
    params.validate()?;
    let support_lo = match detector {
        DetectorKind::Lmpid => -1.0,
        DetectorKind::Mpid { .. } => {
            return Err(Error::DomainError(
                "MPID thresholds are calibrated by Monte Carlo".into(),
            ))
        }
        _ => 0.0,
    };
    if target_pfa == 1.0 {
        return Ok(support_lo);
    }
    // Bracket the crossing.
    let mut lo = support_lo;
    let mut hi = match detector {
        DetectorKind::Lmpid => {
            if params.is_full() {
                (params.k - params.r + 1) as f64 / params.r as f64
            } else {
                lmpid_coefficient(params)
            }
        }
        _ => {
            let mut hi = 1.0;
            while pfa(detector, hi, params)? > target_pfa {
                hi *= 2.0;
                if hi > 1e12 {
                    return Err(Error::NotBracketable(format!(
                        "pfa stays above {target_pfa} up to eta = 1e12"
                    )));
                }
            }
            hi
        }
    };
    let tol = 1e-10 * target_pfa;
    let mut best = (lo, f64::INFINITY);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let value = pfa(detector, mid, params)?;
        let err = (value - target_pfa).abs();
        if err < best.1 {
            best = (mid, err);
        }
        if err <= tol {
            return Ok(mid);
        }
        if value > target_pfa {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
    }
    if best.1 <= tol {
        Ok(best.0)
    } else {
        Err(Error::QuadratureNotConverged(format!(
            "threshold search stalled at |pfa - target| = {:.3e}",
            best.1
        )))
    }
}
