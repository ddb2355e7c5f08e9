//! Invariant adaptive detection of subspace signals competing with
//! subspace-structured jamming and Gaussian clutter-plus-noise of
//! unknown covariance.
//!
//! The crate covers the full pipeline: reduction of the raw detection
//! problem to canonical form, the maximal invariant statistic and its
//! transformation group, the invariant detector family (MPID, LMPID,
//! GLRT, 2S-GLRT, ED), closed-form false-alarm and detection
//! probabilities, and a deterministic Monte Carlo harness that
//! calibrates thresholds and estimates detection curves.

pub mod canonical;
pub mod detectors;
pub mod distributions;
pub mod error;
pub mod invariant;
pub mod linalg;
pub mod montecarlo;
pub mod performance;
pub mod quad;
pub mod rng;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};

/// Problem size bundle shared across modules: `n` channels, `k`
/// secondary snapshots, signal subspace dimension `r`, interference
/// subspace dimension `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Params {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub t: usize,
}

impl Params {
    pub fn new(n: usize, k: usize, r: usize, t: usize) -> Result<Self> {
        let p = Self { n, k, r, t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.r < 1 || self.t < 1 {
            return Err(Error::DomainError(format!(
                "need n >= 2, r >= 1, t >= 1; got n={}, r={}, t={}",
                self.n, self.r, self.t
            )));
        }
        if self.m() > self.n {
            return Err(Error::DomainError(format!(
                "t + r = {} exceeds n = {}",
                self.m(),
                self.n
            )));
        }
        if self.k < self.n {
            return Err(Error::DomainError(format!(
                "need k >= n, got k={}, n={}",
                self.k, self.n
            )));
        }
        Ok(())
    }

    /// Combined signal-plus-interference subspace dimension `t + r`.
    pub fn m(&self) -> usize {
        self.t + self.r
    }

    /// Whether the combined subspace fills the observation space.
    pub fn is_full(&self) -> bool {
        self.m() == self.n
    }

    pub fn dims(&self) -> canonical::Dims {
        canonical::Dims {
            n: self.n,
            t: self.t,
            r: self.r,
        }
    }
}

/// Which hypothesis generated (or is assumed for) the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Hypothesis {
    /// Interference only.
    H0,
    /// Target present.
    H1,
}

/// Decibel to linear power conversion.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power to decibel conversion.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
