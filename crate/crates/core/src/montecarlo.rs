//! Monte Carlo harness: synthesize trials, calibrate thresholds from
//! H0 runs, estimate detection probability over an SINR grid, and
//! attach the closed-form predictions where they exist.
//!
//! Every trial draws its generator from `(seed, stream, trial index)`,
//! so curves are bit-reproducible for a fixed spec regardless of the
//! number of worker threads. The jammer coordinate is redrawn each
//! trial with a random direction at the configured INR; invariance
//! makes that choice immaterial, which the CFAR checks verify.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{canonicalize, synthesize_data, transform_data, CanonicalForm};
use crate::detectors::DetectorKind;
use crate::distributions::standard_complex_normal;
use crate::error::{Error, Result};
use crate::invariant::compute_maximal_invariant;
use crate::performance;
use crate::rng::{trial_rng, Stream};
use crate::scenario::{scale_jammer_to_inr, scale_signal_to_sinr, Scenario, SignalParams};
use crate::{db_to_linear, Hypothesis, Params};

/// Full description of one Monte Carlo experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub detectors: Vec<DetectorKind>,
    /// Target false-alarm probability.
    pub pfa: f64,
    /// Jammer power target (dB over thermal noise); `-inf` disables.
    pub inr_db: f64,
    pub sinr_grid_db: Vec<f64>,
    pub trials_threshold: u64,
    pub trials_pd: u64,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(Error::DomainError(format!(
                "pfa must lie in (0, 1), got {}",
                self.pfa
            )));
        }
        if self.trials_pd == 0 {
            return Err(Error::DomainError("trials_pd must be positive".into()));
        }
        let strictly_increasing = self
            .sinr_grid_db
            .windows(2)
            .all(|w| w[1].partial_cmp(&w[0]) == Some(std::cmp::Ordering::Greater));
        if !strictly_increasing {
            return Err(Error::DomainError(
                "sinr grid must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    fn params(&self) -> Params {
        self.scenario.params
    }
}

/// One row of a detection curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub sinr_db: f64,
    pub eta: f64,
    pub pd_mc: f64,
    pub pd_stderr: f64,
    pub pd_closed: Option<f64>,
}

/// Detection curve of one detector over the SINR grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceCurve {
    pub detector: String,
    /// Fixed threshold, when the detector uses one (the MPID is
    /// recalibrated per grid point instead).
    pub eta: Option<f64>,
    /// Empirical false-alarm rate of the fixed threshold on fresh H0
    /// trials.
    pub achieved_pfa: Option<f64>,
    pub rows: Vec<CurveRow>,
}

struct TrialContext<'a> {
    scenario: &'a Scenario,
    cf: CanonicalForm,
    params: Params,
    inr_db: f64,
}

impl<'a> TrialContext<'a> {
    fn new(spec: &'a ExperimentSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            scenario: &spec.scenario,
            cf: canonicalize(&spec.scenario)?,
            params: spec.params(),
            inr_db: spec.inr_db,
        })
    }

    /// Detector statistic of one synthesized trial.
    fn statistic(
        &self,
        detector: &DetectorKind,
        hypothesis: Hypothesis,
        p: &[Complex64],
        seed: u64,
        stream: Stream,
        trial: u64,
    ) -> Result<f64> {
        let mut rng = trial_rng(seed, stream, trial);
        let q_dir: Vec<Complex64> = (0..self.params.t)
            .map(|_| standard_complex_normal(&mut rng))
            .collect();
        let q = scale_jammer_to_inr(self.scenario, &self.cf, &q_dir, self.inr_db)?;
        let signal = SignalParams {
            p: p.to_vec(),
            q,
            target_sinr_db: None,
            inr_db: self.inr_db,
        };
        let (primary, secondary) = synthesize_data(self.scenario, &signal, hypothesis, &mut rng)?;
        let stat = transform_data(&self.cf, &primary, &secondary)?;
        let inv = compute_maximal_invariant(&stat)?;
        detector.evaluate(&inv, &self.params)
    }

    fn zero_p(&self) -> Vec<Complex64> {
        vec![Complex64::ZERO; self.params.r]
    }
}

/// Calibrate a detector threshold from H0 trials: the ⌈trials·pfa⌉-th
/// largest statistic. Requires `trials · pfa >= 100`.
pub fn calibrate_threshold_mc(spec: &ExperimentSpec, detector: &DetectorKind) -> Result<f64> {
    let ctx = TrialContext::new(spec)?;
    let trials = spec.trials_threshold;
    if (trials as f64) * spec.pfa < 100.0 {
        return Err(Error::InsufficientTrials(format!(
            "{} trials at pfa {} leave fewer than 100 exceedances",
            trials, spec.pfa
        )));
    }
    let p0 = ctx.zero_p();
    let mut stats: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| ctx.statistic(detector, Hypothesis::H0, &p0, spec.seed, Stream::Threshold, i))
        .collect::<Result<_>>()?;
    stats.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let rank = ((trials as f64) * spec.pfa).ceil() as usize;
    Ok(stats[rank.clamp(1, stats.len()) - 1])
}

/// Estimate detection probability at one SINR grid point with the
/// binomial standard error. The signal direction is fixed and scaled
/// to the requested SINR; only the SINR matters for invariant
/// detectors.
pub fn estimate_pd(
    spec: &ExperimentSpec,
    detector: &DetectorKind,
    eta: f64,
    sinr_db: f64,
) -> Result<(f64, f64)> {
    if !eta.is_finite() {
        return Err(Error::DomainError(format!("threshold {eta} is not finite")));
    }
    let ctx = TrialContext::new(spec)?;
    let direction = vec![Complex64::ONE; ctx.params.r];
    let p = scale_signal_to_sinr(&ctx.cf, &direction, db_to_linear(sinr_db))?;
    let stream = Stream::DetectionGrid(sinr_db.to_bits());
    let trials = spec.trials_pd;
    let exceedances: u64 = (0..trials)
        .into_par_iter()
        .map(|i| {
            ctx.statistic(detector, Hypothesis::H1, &p, spec.seed, stream, i)
                .map(|s| u64::from(s > eta))
        })
        .sum::<Result<u64>>()?;
    let pd = exceedances as f64 / trials as f64;
    let stderr = (pd * (1.0 - pd) / trials as f64).sqrt();
    Ok((pd, stderr))
}

/// Empirical false-alarm rate of a fixed threshold on fresh H0 trials.
pub fn measure_pfa(spec: &ExperimentSpec, detector: &DetectorKind, eta: f64) -> Result<f64> {
    let ctx = TrialContext::new(spec)?;
    let p0 = ctx.zero_p();
    let trials = spec.trials_threshold;
    let exceedances: u64 = (0..trials)
        .into_par_iter()
        .map(|i| {
            ctx.statistic(detector, Hypothesis::H0, &p0, spec.seed, Stream::AchievedPfa, i)
                .map(|s| u64::from(s > eta))
        })
        .sum::<Result<u64>>()?;
    Ok(exceedances as f64 / trials as f64)
}

/// Run the full experiment: per detector, calibrate (closed-form
/// threshold inversion where a formula exists, Monte Carlo for the
/// MPID), sweep the SINR grid, and attach closed-form detection
/// probabilities where available.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<PerformanceCurve>> {
    spec.validate()?;
    let params = spec.params();
    let mut curves = Vec::with_capacity(spec.detectors.len());
    for detector in &spec.detectors {
        let curve = match detector {
            DetectorKind::Mpid { .. } => {
                let mut rows = Vec::with_capacity(spec.sinr_grid_db.len());
                for &sinr_db in &spec.sinr_grid_db {
                    let clairvoyant = DetectorKind::Mpid {
                        sinr: db_to_linear(sinr_db),
                    };
                    let eta = calibrate_threshold_mc(spec, &clairvoyant)?;
                    let (pd_mc, pd_stderr) = estimate_pd(spec, &clairvoyant, eta, sinr_db)?;
                    rows.push(CurveRow {
                        sinr_db,
                        eta,
                        pd_mc,
                        pd_stderr,
                        pd_closed: None,
                    });
                }
                PerformanceCurve {
                    detector: detector.label().to_string(),
                    eta: None,
                    achieved_pfa: None,
                    rows,
                }
            }
            _ => {
                let eta = performance::invert_threshold(detector, &params, spec.pfa)?;
                let achieved = measure_pfa(spec, detector, eta)?;
                let mut rows = Vec::with_capacity(spec.sinr_grid_db.len());
                for &sinr_db in &spec.sinr_grid_db {
                    let sinr = db_to_linear(sinr_db);
                    let pd_closed = performance::pd(detector, eta, &params, sinr)?;
                    let (pd_mc, pd_stderr) = estimate_pd(spec, detector, eta, sinr_db)?;
                    rows.push(CurveRow {
                        sinr_db,
                        eta,
                        pd_mc,
                        pd_stderr,
                        pd_closed: Some(pd_closed),
                    });
                }
                PerformanceCurve {
                    detector: detector.label().to_string(),
                    eta: Some(eta),
                    achieved_pfa: Some(achieved),
                    rows,
                }
            }
        };
        curves.push(curve);
    }
    Ok(curves)
}
