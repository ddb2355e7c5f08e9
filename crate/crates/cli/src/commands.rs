//! Subcommand implementations. Each returns a process exit code:
//! 0 success, 1 property-suite failure, 2 usage/config error,
//! 3 numerical failure.

use std::path::Path;

use serde::Serialize;

use radinv_core::detectors::DetectorKind;
use radinv_core::montecarlo::run_experiment;
use radinv_core::performance::{self, OperatingPoint};
use radinv_core::verify::{run_suite, SuiteKind};
use radinv_core::{db_to_linear, Params};

use crate::config::{parse_detector, ExperimentConfig};
use crate::output::{emit, render, Format, OutRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

fn usage_error(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn numerical_error(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_NUMERICAL
}

#[derive(Debug, Serialize)]
struct PfaOutput {
    #[serde(flatten)]
    point: OperatingPoint,
    params: Params,
}

/// Evaluate or invert a closed-form false-alarm probability.
#[allow(clippy::too_many_arguments)]
pub fn cmd_pfa(
    detector: &str,
    n: usize,
    k: usize,
    r: usize,
    t: usize,
    eta: Option<f64>,
    pfa: Option<f64>,
) -> i32 {
    let detector_kind = match parse_detector(detector) {
        Ok(DetectorKind::Mpid { .. }) => {
            return usage_error("the MPID has no closed-form false-alarm probability");
        }
        Ok(kind) => kind,
        Err(msg) => return usage_error(&msg),
    };
    let params = match Params::new(n, k, r, t) {
        Ok(p) => p,
        Err(e) => return usage_error(&e.to_string()),
    };
    let (eta, pfa) = match (eta, pfa) {
        (Some(eta), None) => match performance::pfa(&detector_kind, eta, &params) {
            Ok(p) => (eta, p),
            Err(e) => return numerical_error(&e.to_string()),
        },
        (None, Some(target)) => match performance::invert_threshold(&detector_kind, &params, target)
        {
            Ok(eta) => (eta, target),
            Err(radinv_core::Error::NotBracketable(msg)) => return usage_error(&msg),
            Err(e) => return numerical_error(&e.to_string()),
        },
        _ => return usage_error("provide exactly one of --eta or --pfa"),
    };
    let out = PfaOutput {
        point: OperatingPoint {
            detector: detector.to_string(),
            eta,
            pfa,
            sinr_db: None,
            pd: None,
        },
        params,
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    EXIT_OK
}

/// Closed-form detection curves from a config (no Monte Carlo).
pub fn cmd_pd_curve(config: &Path, output: Option<&Path>, format: Format) -> i32 {
    let cfg = match ExperimentConfig::load(config) {
        Ok(c) => c,
        Err(msg) => return usage_error(&msg),
    };
    let spec = match cfg.to_spec() {
        Ok(s) => s,
        Err(msg) => return usage_error(&msg),
    };
    if spec
        .detectors
        .iter()
        .any(|d| matches!(d, DetectorKind::Mpid { .. }))
    {
        return usage_error(
            "the MPID has no closed-form performance; use `simulate` for Monte Carlo curves",
        );
    }
    let params = spec.scenario.params;
    let mut rows = Vec::new();
    for detector in &spec.detectors {
        let eta = match performance::invert_threshold(detector, &params, spec.pfa) {
            Ok(eta) => eta,
            Err(e) => return numerical_error(&e.to_string()),
        };
        for &sinr_db in &spec.sinr_grid_db {
            let pd = match performance::pd(detector, eta, &params, db_to_linear(sinr_db)) {
                Ok(pd) => pd,
                Err(e) => return numerical_error(&e.to_string()),
            };
            rows.push(OutRow {
                detector: detector.label().to_string(),
                sinr_db,
                eta,
                pd_closed: Some(pd),
                pd_mc: None,
                pd_stderr: None,
            });
        }
    }
    write_rows(&rows, output, format)
}

/// Full Monte Carlo experiment with closed-form columns attached.
pub fn cmd_simulate(config: &Path, output: Option<&Path>, format: Format) -> i32 {
    let cfg = match ExperimentConfig::load(config) {
        Ok(c) => c,
        Err(msg) => return usage_error(&msg),
    };
    let spec = match cfg.to_spec() {
        Ok(s) => s,
        Err(msg) => return usage_error(&msg),
    };
    let curves = match run_experiment(&spec) {
        Ok(c) => c,
        Err(e) => return numerical_error(&e.to_string()),
    };
    let mut rows = Vec::new();
    for curve in &curves {
        for row in &curve.rows {
            rows.push(OutRow {
                detector: curve.detector.clone(),
                sinr_db: row.sinr_db,
                eta: row.eta,
                pd_closed: row.pd_closed,
                pd_mc: Some(row.pd_mc),
                pd_stderr: Some(row.pd_stderr),
            });
        }
    }
    write_rows(&rows, output, format)
}

fn write_rows(rows: &[OutRow], output: Option<&Path>, format: Format) -> i32 {
    let text = render(rows, format);
    match emit(&text, output) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            EXIT_NUMERICAL
        }
    }
}

/// Run one verification suite and print its JSON report.
pub fn cmd_verify(suite: &str, seed: u64, trials: u64) -> i32 {
    let kind: SuiteKind = match suite.parse() {
        Ok(kind) => kind,
        Err(msg) => return usage_error(&msg),
    };
    match run_suite(kind, seed, trials) {
        Ok(report) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            if report.passed {
                EXIT_OK
            } else {
                EXIT_PROPERTY_FAILURE
            }
        }
        Err(e) => numerical_error(&e.to_string()),
    }
}
