//! Complex-variate distribution family used throughout: central and
//! noncentral beta/F with "complex degrees of freedom", the joint laws
//! of the maximal invariant, circular complex normal sampling, and
//! goodness-of-fit helpers.
//!
//! Conventions (these are what make the closed-form false-alarm
//! expressions and the `p = 1/(1+F)` beta relations hold):
//! - a complex chi-square with K complex dof is the sum of squared
//!   moduli of K iid standard circular complex normals, i.e. a
//!   Gamma(K, 1) variable;
//! - the complex F is the plain ratio of independent complex
//!   chi-squares, with no dof normalization;
//! - the complex central beta with (n, m) complex dof has density
//!   Γ(n+m)/(Γ(n)Γ(m)) x^{n-1} (1-x)^{m-1} on (0, 1]. The noncentral
//!   variant is the Poisson(δ²)-weighted mixture over the second dof.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{vec_add, ComplexMatrix, HermitianMatrix};
use crate::{Hypothesis, Params};

/// Degrees-of-freedom bundle for the complex F family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexDof {
    /// Numerator complex dof.
    pub n: usize,
    /// Denominator complex dof.
    pub m: usize,
    /// Noncentrality δ² (of the numerator chi-square).
    pub delta2: f64,
}

impl ComplexDof {
    pub fn central(n: usize, m: usize) -> Self {
        Self { n, m, delta2: 0.0 }
    }

    pub fn noncentral(n: usize, m: usize, delta2: f64) -> Self {
        Self { n, m, delta2 }
    }
}

pub(crate) fn ln_choose(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Log of the finite confluent sum
/// `Σ_{k=0}^{n} C(n,k) (r-1)!/(r+k-1)! w^k`
/// shared by the noncentral beta density and the likelihood-ratio
/// statistics. Evaluated in log space for large positive `w`; small
/// negative `w` (finite-difference probes) sums directly.
pub(crate) fn ln_confluent_sum(n: usize, r: usize, w: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    if w < 0.0 {
        debug_assert!(w > -1.0, "negative arguments only arise from small probes");
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 0..n {
            term *= w * (n - k) as f64 / (((k + 1) * (r + k)) as f64);
            sum += term;
        }
        return sum.ln();
    }
    let ln_w = w.ln();
    let ln_gamma_r = ln_gamma(r as f64);
    let mut terms = Vec::with_capacity(n + 1);
    let mut max = f64::NEG_INFINITY;
    for k in 0..=n {
        let lt = ln_choose(n, k) + ln_gamma_r - ln_gamma((r + k) as f64) + k as f64 * ln_w;
        terms.push(lt);
        if lt > max {
            max = lt;
        }
    }
    max + terms.iter().map(|lt| (lt - max).exp()).sum::<f64>().ln()
}

/// Density of the complex central beta distribution with (n, m)
/// complex degrees of freedom at `x` in (0, 1].
pub fn complex_beta_pdf(x: f64, n: usize, m: usize) -> Result<f64> {
    if n < 1 || m < 1 {
        return Err(Error::DomainError(format!("beta dof must be >= 1, got ({n}, {m})")));
    }
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::DomainError(format!("beta argument {x} outside (0, 1]")));
    }
    let mut ln_pdf = ln_gamma((n + m) as f64) - ln_gamma(n as f64) - ln_gamma(m as f64);
    if n > 1 {
        ln_pdf += (n - 1) as f64 * x.ln();
    }
    if m > 1 {
        if x == 1.0 {
            return Ok(0.0);
        }
        ln_pdf += (m - 1) as f64 * (1.0 - x).ln();
    }
    Ok(ln_pdf.exp())
}

/// CDF of the complex central beta distribution (regularized
/// incomplete beta with integer complex dof).
pub fn complex_beta_cdf(x: f64, n: usize, m: usize) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        beta_reg(n as f64, m as f64, x)
    }
}

/// CDF of the complex (non)central F distribution at `x >= 0`.
///
/// Central case: `P[F <= x] = I_{x/(1+x)}(n, m)`. Noncentral case:
/// Poisson(δ²)-weighted mixture over the numerator complex dof,
/// truncated once the residual Poisson tail is below 1e-12.
pub fn complex_f_cdf(x: f64, dof: &ComplexDof) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let n = dof.n as f64;
    let m = dof.m as f64;
    let xb = x / (1.0 + x);
    if dof.delta2 == 0.0 {
        return beta_reg(n, m, xb);
    }
    let lam = dof.delta2;
    let ln_lam = lam.ln();
    // Mixture terms advance by the stable downward recurrence
    // I_{xb}(n+j+1, m) = I_{xb}(n+j, m) - T_j.
    let mut reg = beta_reg(n, m, xb);
    let mut step =
        (ln_gamma(n + m) - ln_gamma(n + 1.0) - ln_gamma(m) + n * xb.ln() + m * (1.0 - xb).ln())
            .exp();
    let j_max = (lam + 40.0 * (lam + 1.0).sqrt() + 60.0).ceil() as usize;
    let mut sum = 0.0;
    let mut cum_weight = 0.0;
    for j in 0..=j_max {
        let jf = j as f64;
        let weight = if j == 0 {
            (-lam).exp()
        } else {
            (-lam + jf * ln_lam - ln_gamma(jf + 1.0)).exp()
        };
        sum += weight * reg;
        cum_weight += weight;
        if 1.0 - cum_weight < 1e-12 || reg <= 0.0 {
            break;
        }
        reg = (reg - step).max(0.0);
        step *= xb * (n + jf + m) / (n + jf + 1.0);
    }
    sum.min(1.0)
}

/// Joint density of the split-case maximal invariant `(p1, p2)` under
/// either hypothesis, for `m < N`.
pub fn joint_pdf_p1_p2(
    x: f64,
    y: f64,
    params: &Params,
    sinr: f64,
    hypothesis: Hypothesis,
) -> Result<f64> {
    params.validate()?;
    if params.is_full() {
        return Err(Error::DomainError(
            "joint p1-p2 law requires m < N; use the p3 law instead".into(),
        ));
    }
    if sinr < 0.0 {
        return Err(Error::DomainError(format!("sinr must be >= 0, got {sinr}")));
    }
    let (n_dof, r) = (params.k - (params.n - params.t) + 1, params.r);
    let f1 = complex_beta_pdf(x, n_dof, r)?;
    let f2 = complex_beta_pdf(
        y,
        params.k - (params.n - params.t) + r + 1,
        params.n - params.t - r,
    )?;
    let s = match hypothesis {
        Hypothesis::H0 => 0.0,
        Hypothesis::H1 => sinr,
    };
    let w = s * y * (1.0 - x);
    Ok(f1 * f2 * (ln_confluent_sum(n_dof, r, w) - s * x * y).exp())
}

/// Density of the full-case maximal invariant `p3` (for `m = N`).
pub fn pdf_p3(x: f64, k: usize, r: usize, sinr: f64, hypothesis: Hypothesis) -> Result<f64> {
    if r < 1 || k < r + 1 {
        return Err(Error::DomainError(format!("need k >= r + 1, got k={k}, r={r}")));
    }
    if sinr < 0.0 {
        return Err(Error::DomainError(format!("sinr must be >= 0, got {sinr}")));
    }
    let n_dof = k - r + 1;
    let f = complex_beta_pdf(x, n_dof, r)?;
    let s = match hypothesis {
        Hypothesis::H0 => 0.0,
        Hypothesis::H1 => sinr,
    };
    let w = s * (1.0 - x);
    Ok(f * (ln_confluent_sum(n_dof, r, w) - s * x).exp())
}

/// One standard circular complex normal draw (real and imaginary parts
/// independent with variance 1/2 each).
pub fn standard_complex_normal(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Sample a circular complex normal vector with the given mean and
/// positive definite covariance, colored by the Cholesky factor.
pub fn sample_complex_normal(
    mean: &[Complex64],
    cov: &HermitianMatrix,
    rng: &mut impl Rng,
) -> Result<Vec<Complex64>> {
    if mean.len() != cov.dim() {
        return Err(Error::DimensionMismatch(format!(
            "mean has {} entries, covariance is {}x{}",
            mean.len(),
            cov.dim(),
            cov.dim()
        )));
    }
    let l = cov.cholesky()?;
    let white: Vec<Complex64> = (0..cov.dim()).map(|_| standard_complex_normal(rng)).collect();
    Ok(vec_add(mean, &l.mul_vec(&white)))
}

/// Matrix of `k` iid samples as columns.
pub fn sample_complex_normal_matrix(
    cov: &HermitianMatrix,
    k: usize,
    rng: &mut impl Rng,
) -> Result<ComplexMatrix> {
    let n = cov.dim();
    let l = cov.cholesky()?;
    let mut out = ComplexMatrix::zeros(n, k);
    for col in 0..k {
        let white: Vec<Complex64> = (0..n).map(|_| standard_complex_normal(rng)).collect();
        let sample = l.mul_vec(&white);
        for (row, v) in sample.into_iter().enumerate() {
            out[(row, col)] = v;
        }
    }
    Ok(out)
}

/// One-sample Kolmogorov-Smirnov statistic against a model CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!samples.is_empty(), "KS statistic needs samples");
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        if sa[i] <= sb[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic one-sample KS acceptance bound at the 1% level.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use crate::rng::{trial_rng, Stream};

    #[test]
    fn beta_pdf_uniform_case() {
        for x in [0.1, 0.5, 0.99, 1.0] {
            assert!((complex_beta_pdf(x, 1, 1).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn beta_pdf_hand_value() {
        // n=2, m=3 at 0.5: Γ(5)/(Γ(2)Γ(3)) x (1-x)^2 = 12 * 0.5 * 0.25.
        let v = complex_beta_pdf(0.5, 2, 3).unwrap();
        assert!((v - 1.5).abs() < 1e-13);
    }

    #[test]
    fn beta_pdf_normalizes_over_dof_grid() {
        for n in 1..=6 {
            for m in 1..=6 {
                let integral = quad::rule(512)
                    .integrate(0.0, 1.0, &|x| complex_beta_pdf(x, n, m).unwrap());
                assert!(
                    (integral - 1.0).abs() <= 1e-10,
                    "({n},{m}) integrates to {integral}"
                );
            }
        }
    }

    #[test]
    fn beta_pdf_rejects_out_of_domain() {
        assert!(complex_beta_pdf(0.0, 2, 2).is_err());
        assert!(complex_beta_pdf(1.5, 2, 2).is_err());
        assert!(complex_beta_pdf(-0.1, 2, 2).is_err());
    }

    #[test]
    fn f_cdf_at_zero_and_saturation() {
        let dof = ComplexDof::central(2, 9);
        assert_eq!(complex_f_cdf(0.0, &dof), 0.0);
        assert!((complex_f_cdf(1e9, &dof) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn f_cdf_rank_one_closed_form() {
        // n=1: F(x) = 1 - (1+x)^{-m}.
        for m in [1usize, 4, 9] {
            for x in [0.01, 0.5, 2.0, 30.0] {
                let got = complex_f_cdf(x, &ComplexDof::central(1, m));
                let want = 1.0 - (1.0 + x).powi(-(m as i32));
                assert!((got - want).abs() < 1e-13, "m={m}, x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn f_cdf_noncentral_collapses_to_central_at_zero() {
        for x in [0.1, 1.0, 5.0] {
            let c = complex_f_cdf(x, &ComplexDof::central(3, 7));
            let nc = complex_f_cdf(x, &ComplexDof::noncentral(3, 7, 0.0));
            assert!((c - nc).abs() < 1e-12);
        }
    }

    #[test]
    fn f_cdf_noncentral_matches_direct_mixture() {
        // Small-δ case where the naive mixture over beta CDFs converges
        // quickly; the recurrence path must agree.
        let (n, m, lam) = (3usize, 7usize, 2.5f64);
        for x in [0.2, 1.0, 4.0] {
            let xb = x / (1.0 + x);
            let mut direct = 0.0;
            for j in 0..80 {
                let w = (-lam + (j as f64) * lam.ln() - ln_gamma(j as f64 + 1.0)).exp();
                direct += w * beta_reg(n as f64 + j as f64, m as f64, xb);
            }
            let got = complex_f_cdf(x, &ComplexDof::noncentral(n, m, lam));
            assert!((got - direct).abs() < 1e-11, "x={x}: {got} vs {direct}");
        }
    }

    #[test]
    fn f_cdf_noncentral_large_delta_is_stable() {
        // 40 dB SINR scale: must stay in [0,1] and be monotone in x.
        let dof = ComplexDof::noncentral(2, 9, 1e4);
        let mut prev = 0.0;
        for i in 1..=40 {
            let x = i as f64 * 400.0;
            let v = complex_f_cdf(x, &dof);
            assert!((0.0..=1.0).contains(&v));
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        assert!(prev > 0.9, "CDF should approach 1 well past the mean");
    }

    #[test]
    fn joint_pdf_reduces_to_central_product_at_zero_sinr() {
        let params = Params::new(8, 12, 2, 4).unwrap();
        let n_dof = 12 - (8 - 4) + 1;
        for &(x, y) in &[(0.3, 0.6), (0.9, 0.2), (0.5, 0.5)] {
            let f0 = joint_pdf_p1_p2(x, y, &params, 0.0, Hypothesis::H1).unwrap();
            let f1 = joint_pdf_p1_p2(x, y, &params, 7.0, Hypothesis::H0).unwrap();
            let prod = complex_beta_pdf(x, n_dof, 2).unwrap()
                * complex_beta_pdf(y, n_dof + 2, 8 - 4 - 2).unwrap();
            assert!((f0 - prod).abs() < 1e-12 * prod.max(1.0));
            assert!((f1 - prod).abs() < 1e-12 * prod.max(1.0));
        }
    }

    #[test]
    fn joint_pdf_normalizes_under_h1() {
        let params = Params::new(8, 12, 2, 4).unwrap();
        for sinr in [0.0, 1.0, 10.0] {
            let rule = quad::rule(256);
            let integral = rule.integrate(0.0, 1.0, &|x| {
                rule.integrate(0.0, 1.0, &|y| {
                    joint_pdf_p1_p2(x, y, &params, sinr, Hypothesis::H1).unwrap()
                })
            });
            assert!(
                (integral - 1.0).abs() <= 1e-8,
                "sinr={sinr}: integral {integral}"
            );
        }
    }

    #[test]
    fn p3_pdf_normalizes_and_is_central_under_h0() {
        let integral = quad::rule(512).integrate(0.0, 1.0, &|x| {
            pdf_p3(x, 12, 4, 5.0, Hypothesis::H1).unwrap()
        });
        assert!((integral - 1.0).abs() <= 1e-8, "integral {integral}");
        for x in [0.2, 0.8] {
            let h0 = pdf_p3(x, 12, 4, 123.0, Hypothesis::H0).unwrap();
            let central = complex_beta_pdf(x, 9, 4).unwrap();
            assert!((h0 - central).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_normal_sampler_moments() {
        let mut rng = trial_rng(1, Stream::Verify(0), 0);
        let cov = HermitianMatrix::identity(3);
        let n = 20_000;
        let mut acc = vec![Complex64::ZERO; 3];
        let mut var = 0.0;
        for _ in 0..n {
            let x = sample_complex_normal(&[Complex64::ZERO; 3], &cov, &mut rng).unwrap();
            for (a, v) in acc.iter_mut().zip(&x) {
                *a += v;
            }
            var += x.iter().map(|c| c.norm_sqr()).sum::<f64>() / 3.0;
        }
        var /= n as f64;
        assert!((var - 1.0).abs() < 0.03, "per-component variance {var}");
        for a in acc {
            assert!((a / n as f64).norm() < 0.03);
        }
    }

    #[test]
    fn complex_normal_sample_covariance_tracks_colored_target() {
        let cov = HermitianMatrix::from_fn_lower(3, |i, j| {
            if i == j {
                Complex64::new(1.0 + i as f64, 0.0)
            } else {
                Complex64::new(0.4, 0.2 * (i as f64 - j as f64))
            }
        });
        assert!(cov.is_positive_definite());
        let mut rng = trial_rng(4, Stream::Verify(4), 0);
        let n = 100_000;
        let mut acc = ComplexMatrix::zeros(3, 3);
        for _ in 0..n {
            let x = sample_complex_normal(&[Complex64::ZERO; 3], &cov, &mut rng).unwrap();
            let outer = ComplexMatrix::from_fn(3, 3, |i, j| x[i] * x[j].conj());
            acc = acc.add(&outer);
        }
        let sample = acc.scale(Complex64::new(1.0 / n as f64, 0.0));
        let err = sample.sub(&cov.to_matrix()).frobenius_norm() / cov.frobenius_norm();
        assert!(err <= 0.05, "sample covariance off by {err:.3}");
    }

    #[test]
    fn complex_normal_rejects_indefinite_cov() {
        let cov = HermitianMatrix::from_diagonal(&[1.0, 0.0]);
        let mut rng = trial_rng(1, Stream::Verify(1), 0);
        assert!(sample_complex_normal(&[Complex64::ZERO; 2], &cov, &mut rng).is_err());
    }

    #[test]
    fn sampler_is_reproducible() {
        let cov = HermitianMatrix::identity(2);
        let mut r1 = trial_rng(9, Stream::Verify(2), 5);
        let mut r2 = trial_rng(9, Stream::Verify(2), 5);
        let a = sample_complex_normal(&[Complex64::ZERO; 2], &cov, &mut r1).unwrap();
        let b = sample_complex_normal(&[Complex64::ZERO; 2], &cov, &mut r2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ks_degenerate_cases() {
        // Constant samples against a continuous CDF.
        let d = ks_statistic(&[0.5; 100], |x| x.clamp(0.0, 1.0));
        assert!(d >= 0.5);
        // Single sample at the median.
        let d = ks_statistic(&[0.5], |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ks_calibration_under_the_model() {
        // Samples drawn from the model CDF itself stay below the 1%
        // critical value in at least 19 of 20 seeded runs.
        let n = 10_000;
        let crit = ks_critical_1pct(n);
        let mut failures = 0;
        for seed in 0..20u64 {
            let mut rng = trial_rng(seed, Stream::Verify(3), 0);
            let samples: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            if ks_statistic(&samples, |x| x.clamp(0.0, 1.0)) > crit {
                failures += 1;
            }
        }
        assert!(failures <= 1, "{failures} of 20 calibration runs failed");
    }
}
