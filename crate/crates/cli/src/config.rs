//! Experiment configuration: the JSON document consumed by `pd-curve`
//! and `simulate`. Unknown keys are rejected so typos fail loudly.

use serde::Deserialize;

use radinv_core::detectors::DetectorKind;
use radinv_core::montecarlo::ExperimentSpec;
use radinv_core::scenario::Scenario;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Channel count N (>= 2).
    pub n: usize,
    /// Secondary snapshot count K (>= N).
    pub k: usize,
    /// Normalized signal steering frequencies (length r, in [-0.5, 0.5)).
    pub signal_frequencies: Vec<f64>,
    /// Normalized jammer steering frequencies (length t).
    pub jammer_frequencies: Vec<f64>,
    /// Thermal noise power, linear. Defaults to 1.
    #[serde(default = "default_noise_power")]
    pub noise_power: f64,
    /// Clutter-to-noise ratio in dB.
    pub cnr_db: f64,
    /// Interferer-to-noise ratio in dB (applied per trial).
    pub inr_db: f64,
    /// One-lag clutter correlation coefficient in [0, 1).
    #[serde(default = "default_one_lag_corr")]
    pub one_lag_corr: f64,
    /// Target false-alarm probability.
    pub pfa: f64,
    /// Strictly increasing SINR grid in dB.
    pub sinr_grid_db: Vec<f64>,
    /// H0 trials for threshold calibration / achieved-pfa estimation.
    #[serde(default = "default_trials_threshold")]
    pub trials_threshold: u64,
    /// H1 trials per SINR grid point.
    #[serde(default = "default_trials_pd")]
    pub trials_pd: u64,
    pub seed: u64,
    /// Detector names: glrt, 2s-glrt, lmpid, ed, mpid.
    pub detectors: Vec<String>,
}

fn default_noise_power() -> f64 {
    1.0
}

fn default_one_lag_corr() -> f64 {
    0.95
}

fn default_trials_threshold() -> u64 {
    200_000
}

fn default_trials_pd() -> u64 {
    5_000
}

pub fn parse_detector(name: &str) -> Result<DetectorKind, String> {
    match name {
        "glrt" => Ok(DetectorKind::Glrt),
        "2s-glrt" => Ok(DetectorKind::TwoStepGlrt),
        "lmpid" => Ok(DetectorKind::Lmpid),
        "ed" => Ok(DetectorKind::Ed),
        // The clairvoyant parameter is rebound to each grid point by
        // the experiment driver.
        "mpid" => Ok(DetectorKind::Mpid { sinr: 0.0 }),
        other => Err(format!(
            "unknown detector '{other}' (expected glrt, 2s-glrt, lmpid, ed, or mpid)"
        )),
    }
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config: {e}"))
    }

    pub fn to_spec(&self) -> Result<ExperimentSpec, String> {
        if self.sinr_grid_db.is_empty() {
            return Err("sinr_grid_db must not be empty".into());
        }
        let scenario = Scenario::from_steering(
            self.n,
            self.k,
            &self.signal_frequencies,
            &self.jammer_frequencies,
            self.noise_power,
            self.cnr_db,
            self.one_lag_corr,
        )
        .map_err(|e| format!("invalid scenario: {e}"))?;
        let detectors = self
            .detectors
            .iter()
            .map(|name| parse_detector(name))
            .collect::<Result<Vec<_>, _>>()?;
        let spec = ExperimentSpec {
            scenario,
            detectors,
            pfa: self.pfa,
            inr_db: self.inr_db,
            sinr_grid_db: self.sinr_grid_db.clone(),
            trials_threshold: self.trials_threshold,
            trials_pd: self.trials_pd,
            seed: self.seed,
        };
        spec.validate().map_err(|e| format!("invalid experiment: {e}"))?;
        Ok(spec)
    }
}
