//! Gauss-Legendre quadrature on finite intervals.
//!
//! Nodes and weights come from Newton iteration on the Legendre
//! polynomials and are cached per order. The adaptive driver doubles
//! the node count until two successive estimates agree; integrands
//! here are smooth beta-weighted CDFs, so convergence is fast.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Quadrature rule on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Compute the order-n rule by Newton iteration on P_n.
    fn compute(n: usize) -> Self {
        assert!(n >= 2);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Initial guess (Abramowitz & Stegun 22.16.6).
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Legendre recurrence for P_n(x) and P'_n(x).
                let mut p0 = 1.0;
                let mut p1 = x;
                for k in 2..=n {
                    let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = pk;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrate f over [a, b].
    pub fn integrate(&self, a: f64, b: f64, f: &impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// Shared rule cache; orders used here are few (powers of two).
pub fn rule(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(GaussLegendre::compute(n)))
        .clone()
}

const BASE_NODES: usize = 256;
const MAX_NODES: usize = 4096;

/// Integrate a smooth function over [a, b], doubling the node count
/// from 256 until two successive estimates agree to a mixed
/// absolute/relative tolerance. Errors if the budget is exhausted.
pub fn integrate_adaptive(a: f64, b: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    if b.partial_cmp(&a) != Some(std::cmp::Ordering::Greater) {
        return Ok(0.0);
    }
    let mut n = BASE_NODES;
    let mut prev = rule(n).integrate(a, b, &f);
    while n < MAX_NODES {
        n *= 2;
        let cur = rule(n).integrate(a, b, &f);
        if (cur - prev).abs() <= 1e-15 + 1e-12 * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNotConverged(format!(
        "no convergence on [{a}, {b}] after {MAX_NODES} nodes"
    )))
}

/// Integrate over [a, b] splitting the interval at the given interior
/// points first (used where integrands have kinks).
pub fn integrate_adaptive_split(a: f64, b: f64, splits: &[f64], f: impl Fn(f64) -> f64) -> Result<f64> {
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(splits.iter().cloned().filter(|&s| s > a && s < b))
        .chain(std::iter::once(b))
        .collect();
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += integrate_adaptive(w[0], w[1], &f)?;
    }
    Ok(total)
}
