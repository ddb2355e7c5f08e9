//! Executable property suites: group invariance of the maximal
//! invariant and the detector statistics, constructive maximality,
//! the sampling laws of the invariant coordinates, and the algebraic
//! identities linking raw-data and invariant detector forms.
//!
//! The suites are exposed as library functions so the CLI `verify`
//! subcommand and the acceptance tests execute the same checks.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::canonical::{
    canonicalize, transform_data, synthesize_data, Dims, SufficientStatistic,
};
use crate::detectors::{
    ed_statistic, glrt_projection_forms, glrt_statistic, lmpid_statistic, mpid_statistic,
    two_step_glrt_statistic, DetectorKind,
};
use crate::distributions::{
    complex_beta_cdf, ks_critical_1pct, ks_statistic, ks_two_sample, ln_confluent_sum,
    standard_complex_normal,
};
use crate::error::Result;
use crate::invariant::{
    apply_group_element, compute_maximal_invariant, random_group_element,
    reconstruct_group_element, MaximalInvariant,
};
use crate::linalg::{vec_norm, vec_sub, ComplexMatrix, HermitianMatrix};
use crate::rng::{trial_rng, Stream};
use crate::scenario::{scale_signal_to_sinr, Scenario, SignalParams};
use crate::{Hypothesis, Params};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Invariance,
    Maximality,
    Distributions,
    Identities,
}

impl std::str::FromStr for SuiteKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "invariance" => Ok(SuiteKind::Invariance),
            "maximality" => Ok(SuiteKind::Maximality),
            "distributions" => Ok(SuiteKind::Distributions),
            "identities" => Ok(SuiteKind::Identities),
            other => Err(format!("unknown suite '{other}'")),
        }
    }
}

/// Outcome of one named check within a suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Replay handle for the first failing instance, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_instance: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: SuiteKind,
    pub seed: u64,
    pub trials: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    fn collect(suite: SuiteKind, seed: u64, trials: u64, checks: Vec<CheckResult>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self {
            suite,
            seed,
            trials,
            passed,
            checks,
        }
    }
}

pub fn run_suite(suite: SuiteKind, seed: u64, trials: u64) -> Result<SuiteReport> {
    match suite {
        SuiteKind::Invariance => invariance_suite(seed, trials),
        SuiteKind::Maximality => maximality_suite(seed, trials),
        SuiteKind::Distributions => distributions_suite(seed, trials),
        SuiteKind::Identities => identities_suite(seed, trials),
    }
}

const SPLIT_GEOMETRY: (Dims, usize) = (Dims { n: 8, t: 4, r: 2 }, 12);
const FULL_GEOMETRY: (Dims, usize) = (Dims { n: 6, t: 4, r: 2 }, 9);

fn split_params() -> Params {
    Params::new(8, 12, 2, 4).unwrap()
}

fn full_params() -> Params {
    Params::new(6, 9, 2, 4).unwrap()
}

/// Statistic with white generating distribution, valid for property
/// checks that hold for every distribution.
fn random_stat(dims: Dims, k: usize, rng: &mut impl Rng) -> SufficientStatistic {
    let n = dims.n;
    let z: Vec<Complex64> = (0..n).map(|_| standard_complex_normal(rng)).collect();
    let mut scatter = ComplexMatrix::zeros(n, n);
    for _ in 0..k {
        let col: Vec<Complex64> = (0..n).map(|_| standard_complex_normal(rng)).collect();
        let outer = ComplexMatrix::from_fn(n, n, |i, j| col[i] * col[j].conj());
        scatter = scatter.add(&outer);
    }
    let s = HermitianMatrix::from_matrix(&scatter, 1e-8).expect("scatter is Hermitian");
    SufficientStatistic::new(dims, z, s).expect("scatter is PD for k >= n")
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
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
    .expect("reference scenario is well formed")
}

fn full_scenario() -> Scenario {
    Scenario::from_steering(
        6,
        9,
        &[0.05, 0.15],
        &[-0.3, -0.15, 0.25, 0.4],
        1.0,
        30.0,
        0.95,
    )
    .expect("full-subspace scenario is well formed")
}

/// Draw one maximal invariant from synthesized data.
fn sample_invariant(
    scenario: &Scenario,
    cf: &crate::canonical::CanonicalForm,
    sinr_db: Option<f64>,
    seed: u64,
    stream_tag: u64,
    trial: u64,
) -> Result<MaximalInvariant> {
    let mut rng = trial_rng(seed, Stream::Verify(stream_tag), trial);
    let t = scenario.params.t;
    let q_dir: Vec<Complex64> = (0..t).map(|_| standard_complex_normal(&mut rng)).collect();
    let q = crate::scenario::scale_jammer_to_inr(scenario, cf, &q_dir, 30.0)?;
    let (p, hyp) = match sinr_db {
        Some(db) => {
            let direction = vec![Complex64::ONE; scenario.params.r];
            (
                scale_signal_to_sinr(cf, &direction, crate::db_to_linear(db))?,
                Hypothesis::H1,
            )
        }
        None => (vec![Complex64::ZERO; scenario.params.r], Hypothesis::H0),
    };
    let signal = SignalParams {
        p,
        q,
        target_sinr_db: sinr_db,
        inr_db: 30.0,
    };
    let (primary, secondary) = synthesize_data(scenario, &signal, hyp, &mut rng)?;
    let stat = transform_data(cf, &primary, &secondary)?;
    compute_maximal_invariant(&stat)
}

/// Group invariance of the maximal invariant and of all detector
/// statistics, plus preservation of the H0 family under the action.
fn invariance_suite(seed: u64, trials: u64) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let split = split_params();
    let full = full_params();

    // Maximal invariant and detector statistics unchanged under the
    // group action (split and full geometries).
    let mut worst = 0.0f64;
    let mut failing = None;
    for trial in 0..trials {
        let (dims, k, params) = if trial % 4 == 3 {
            (FULL_GEOMETRY.0, FULL_GEOMETRY.1, &full)
        } else {
            (SPLIT_GEOMETRY.0, SPLIT_GEOMETRY.1, &split)
        };
        let mut rng = trial_rng(seed, Stream::Verify(100), trial);
        let stat = random_stat(dims, k, &mut rng);
        let g = random_group_element(dims, &mut rng, 25.0)?;
        let moved = apply_group_element(&g, &stat)?;
        let inv = compute_maximal_invariant(&stat)?;
        let inv_moved = compute_maximal_invariant(&moved)?;
        if !inv.approx_eq(&inv_moved, 1e-8) {
            failing.get_or_insert(format!("invariant trial {trial}"));
        }
        let dets: &[DetectorKind] = if dims.is_full() {
            &[
                DetectorKind::Mpid { sinr: 5.0 },
                DetectorKind::Lmpid,
                DetectorKind::Glrt,
                DetectorKind::TwoStepGlrt,
                DetectorKind::Ed,
            ]
        } else {
            &[
                DetectorKind::Mpid { sinr: 5.0 },
                DetectorKind::Lmpid,
                DetectorKind::Glrt,
                DetectorKind::TwoStepGlrt,
            ]
        };
        for det in dets {
            let a = det.evaluate(&inv, params)?;
            let b = det.evaluate(&inv_moved, params)?;
            let e = rel_err(a, b);
            worst = worst.max(e);
            if e > 1e-8 {
                failing.get_or_insert(format!("{} trial {trial}: {a} vs {b}", det.label()));
            }
        }
        // Raw-data forms transform invariantly too.
        let e = rel_err(glrt_statistic(&stat)?, glrt_statistic(&moved)?);
        worst = worst.max(e);
        if e > 1e-8 {
            failing.get_or_insert(format!("raw glrt trial {trial}"));
        }
    }
    checks.push(CheckResult {
        name: "statistics-invariant-under-group".into(),
        passed: failing.is_none(),
        detail: format!("worst relative change {worst:.3e} over {trials} trials"),
        failing_instance: failing,
    });

    // Transformed H0 data stays H0-distributed: p1 keeps its central
    // beta law after a random group action.
    let scenario = paper_scenario();
    let cf = canonicalize(&scenario)?;
    let n_samples = (trials * 4).max(2000) as usize;
    let mut p1_samples = Vec::with_capacity(n_samples);
    for trial in 0..n_samples as u64 {
        let mut rng = trial_rng(seed, Stream::Verify(101), trial);
        let q_dir: Vec<Complex64> = (0..4).map(|_| standard_complex_normal(&mut rng)).collect();
        let q = crate::scenario::scale_jammer_to_inr(&scenario, &cf, &q_dir, 30.0)?;
        let signal = SignalParams {
            p: vec![Complex64::ZERO; 2],
            q,
            target_sinr_db: None,
            inr_db: 30.0,
        };
        let (primary, secondary) = synthesize_data(&scenario, &signal, Hypothesis::H0, &mut rng)?;
        let stat = transform_data(&cf, &primary, &secondary)?;
        let g = random_group_element(stat.dims, &mut rng, 25.0)?;
        let moved = apply_group_element(&g, &stat)?;
        let (p1, _) = compute_maximal_invariant(&moved)?.split()?;
        p1_samples.push(p1);
    }
    let d = ks_statistic(&p1_samples, |x| complex_beta_cdf(x, 12 - (8 - 4) + 1, 2));
    let crit = ks_critical_1pct(p1_samples.len());
    checks.push(CheckResult {
        name: "transformed-h0-data-keeps-central-law".into(),
        passed: d <= crit,
        detail: format!("KS = {d:.4} vs critical {crit:.4} on {n_samples} samples"),
        failing_instance: (d > crit).then(|| format!("seed {seed}")),
    });

    Ok(SuiteReport::collect(SuiteKind::Invariance, seed, trials, checks))
}

/// Constructive maximality: pairs with equal invariants are connected
/// by a reconstructable group element.
fn maximality_suite(seed: u64, trials: u64) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for (name, (dims, k)) in [("split", SPLIT_GEOMETRY), ("full", FULL_GEOMETRY)] {
        let mut worst = 0.0f64;
        let mut failing = None;
        for trial in 0..trials {
            let mut rng = trial_rng(seed, Stream::Verify(110), trial * 2 + u64::from(name == "full"));
            let stat_b = random_stat(dims, k, &mut rng);
            let g = random_group_element(dims, &mut rng, 10.0)?;
            let stat_a = apply_group_element(&g, &stat_b)?;
            let rebuilt = reconstruct_group_element(&stat_a, &stat_b)?;
            let mapped = apply_group_element(&rebuilt, &stat_b)?;
            let z_err = vec_norm(&vec_sub(&mapped.z, &stat_a.z)) / vec_norm(&stat_a.z).max(1.0);
            let s_err = mapped.s.sub(&stat_a.s).frobenius_norm() / stat_a.s.frobenius_norm();
            let err = z_err.max(s_err);
            worst = worst.max(err);
            if err > 1e-6 {
                failing.get_or_insert(format!("{name} trial {trial}: error {err:.3e}"));
            }
        }
        checks.push(CheckResult {
            name: format!("reconstruction-roundtrip-{name}"),
            passed: failing.is_none(),
            detail: format!("worst roundtrip error {worst:.3e} over {trials} pairs"),
            failing_instance: failing,
        });
    }
    Ok(SuiteReport::collect(SuiteKind::Maximality, seed, trials, checks))
}

/// Sampling laws of the invariant coordinates: central beta fits under
/// H0, the conditional law of p1, ancillarity of p2, and the p3 law in
/// the full-subspace case.
fn distributions_suite(seed: u64, trials: u64) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let n_samples = trials.max(2000) as usize;
    let scenario = paper_scenario();
    let cf = canonicalize(&scenario)?;
    let (k, n, t, r) = (12usize, 8usize, 4usize, 2usize);

    // Gather (p1, p2) under H0 and under H1 at a fixed SINR.
    let mut p1_h0 = Vec::with_capacity(n_samples);
    let mut p2_h0 = Vec::with_capacity(n_samples);
    let mut p2_h1 = Vec::with_capacity(n_samples);
    for trial in 0..n_samples as u64 {
        let inv = sample_invariant(&scenario, &cf, None, seed, 120, trial)?;
        let (p1, p2) = inv.split()?;
        p1_h0.push(p1);
        p2_h0.push(p2);
        let inv = sample_invariant(&scenario, &cf, Some(16.0), seed, 121, trial)?;
        p2_h1.push(inv.split()?.1);
    }

    // p2 ~ complex central beta(K-(N-m)+1, N-m).
    let m = t + r;
    let d = ks_statistic(&p2_h0, |x| complex_beta_cdf(x, k - (n - m) + 1, n - m));
    let crit = ks_critical_1pct(n_samples);
    checks.push(CheckResult {
        name: "p2-central-beta-law".into(),
        passed: d <= crit,
        detail: format!("KS = {d:.4} vs critical {crit:.4}"),
        failing_instance: (d > crit).then(|| format!("seed {seed}")),
    });

    // p1 under H0 ~ complex central beta(K-(N-t)+1, r), independent of p2.
    let d = ks_statistic(&p1_h0, |x| complex_beta_cdf(x, k - (n - t) + 1, r));
    checks.push(CheckResult {
        name: "p1-central-beta-law-under-h0".into(),
        passed: d <= crit,
        detail: format!("KS = {d:.4} vs critical {crit:.4}"),
        failing_instance: (d > crit).then(|| format!("seed {seed}")),
    });

    // Ancillarity: p2 has the same distribution under both hypotheses.
    let d = ks_two_sample(&p2_h0, &p2_h1);
    let crit2 = 1.63 * (2.0 / n_samples as f64).sqrt();
    checks.push(CheckResult {
        name: "p2-ancillary-across-hypotheses".into(),
        passed: d <= crit2,
        detail: format!("two-sample KS = {d:.4} vs critical {crit2:.4}"),
        failing_instance: (d > crit2).then(|| format!("seed {seed}")),
    });

    // p3 ~ complex central beta(K-r+1, r) in the full-subspace case.
    let fsc = full_scenario();
    let fcf = canonicalize(&fsc)?;
    let mut p3 = Vec::with_capacity(n_samples);
    for trial in 0..n_samples as u64 {
        let inv = sample_invariant(&fsc, &fcf, None, seed, 122, trial)?;
        p3.push(inv.p3()?);
    }
    let d = ks_statistic(&p3, |x| complex_beta_cdf(x, 9 - 2 + 1, 2));
    checks.push(CheckResult {
        name: "p3-central-beta-law".into(),
        passed: d <= crit,
        detail: format!("KS = {d:.4} vs critical {crit:.4}"),
        failing_instance: (d > crit).then(|| format!("seed {seed}")),
    });

    Ok(SuiteReport::collect(SuiteKind::Distributions, seed, trials, checks))
}

/// Algebraic identities: raw-data forms equal invariant forms, the
/// LMPID is the zero-SINR derivative of the MPID, and the m = N
/// statistics collapse onto the energy detector.
fn identities_suite(seed: u64, trials: u64) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let split = split_params();
    let (dims, k) = SPLIT_GEOMETRY;

    // Raw projection forms vs invariant forms.
    let mut worst = 0.0f64;
    let mut failing = None;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, Stream::Verify(130), trial);
        let stat = random_stat(dims, k, &mut rng);
        let inv = compute_maximal_invariant(&stat)?;
        let (p1, p2) = inv.split()?;
        let (q_t, q_m) = glrt_projection_forms(&stat)?;
        let e1 = rel_err((1.0 + q_t) / (1.0 + q_m), 1.0 / p1);
        let e2 = rel_err(q_t - q_m, (1.0 - p1) / (p1 * p2));
        let e3 = rel_err(q_t, (1.0 - p1 * p2) / (p1 * p2));
        let e4 = rel_err(q_m, (1.0 - p2) / p2);
        let e = e1.max(e2).max(e3).max(e4);
        worst = worst.max(e);
        if e > 1e-9 {
            failing.get_or_insert(format!("split trial {trial}: error {e:.3e}"));
        }
        // The self-checking entry points must agree with themselves too.
        glrt_statistic(&stat)?;
        two_step_glrt_statistic(&stat)?;
    }
    checks.push(CheckResult {
        name: "glrt-and-2sglrt-raw-vs-invariant".into(),
        passed: failing.is_none(),
        detail: format!("worst relative error {worst:.3e}"),
        failing_instance: failing,
    });

    // m = N: the raw whitened-projection energy, the explicit
    // z2† S22⁻¹ z2 form, and (1 - p3)/p3 all coincide.
    let (fdims, fk) = FULL_GEOMETRY;
    let mut worst = 0.0f64;
    let mut failing = None;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, Stream::Verify(131), trial);
        let stat = random_stat(fdims, fk, &mut rng);
        let p3 = compute_maximal_invariant(&stat)?.p3()?;
        let (q_t, q_m) = glrt_projection_forms(&stat)?;
        let raw_energy = {
            let x = stat.s22().solve_vec(stat.z2()).expect("S22 is PD");
            crate::linalg::inner(stat.z2(), &x).re
        };
        let e = rel_err(q_t, (1.0 - p3) / p3)
            .max(rel_err(raw_energy, (1.0 - p3) / p3))
            .max(q_m.abs());
        worst = worst.max(e);
        if e > 1e-9 {
            failing.get_or_insert(format!("full trial {trial}: error {e:.3e}"));
        }
        ed_statistic(&stat)?;
        glrt_statistic(&stat)?;
        two_step_glrt_statistic(&stat)?;
    }
    checks.push(CheckResult {
        name: "ed-collapse-at-full-subspace".into(),
        passed: failing.is_none(),
        detail: format!("worst relative error {worst:.3e}"),
        failing_instance: failing,
    });

    // LMPID as the zero-SINR slope of the MPID (central difference).
    let h = 1e-6;
    let mut worst = 0.0f64;
    let mut failing = None;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, Stream::Verify(132), trial);
        let stat = random_stat(dims, k, &mut rng);
        let inv = compute_maximal_invariant(&stat)?;
        let (p1, p2) = inv.split()?;
        let plus = mpid_statistic(&inv, &split, h)?;
        let n_dof = split.k - (split.n - split.t) + 1;
        let minus = (ln_confluent_sum(n_dof, split.r, -h * p2 * (1.0 - p1)) + h * p1 * p2).exp();
        let fd = (plus - minus) / (2.0 * h);
        let t = lmpid_statistic(&inv, &split)?;
        let err = (fd - t).abs() / t.abs().max(1e-6);
        worst = worst.max(err);
        if err > 1e-4 {
            failing.get_or_insert(format!("trial {trial}: fd {fd} vs lmpid {t}"));
        }
    }
    checks.push(CheckResult {
        name: "lmpid-is-mpid-derivative".into(),
        passed: failing.is_none(),
        detail: format!("worst relative error {worst:.3e} at h = {h}"),
        failing_instance: failing,
    });

    Ok(SuiteReport::collect(SuiteKind::Identities, seed, trials, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_at_reduced_size() {
        for suite in [
            SuiteKind::Invariance,
            SuiteKind::Maximality,
            SuiteKind::Distributions,
            SuiteKind::Identities,
        ] {
            let report = run_suite(suite, 42, 60).unwrap();
            assert!(
                report.passed,
                "suite {suite:?} failed: {:#?}",
                report.checks
            );
        }
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!(
            "invariance".parse::<SuiteKind>().unwrap(),
            SuiteKind::Invariance
        );
        assert!("bogus".parse::<SuiteKind>().is_err());
    }
}
