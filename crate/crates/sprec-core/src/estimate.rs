//! Probability estimates with method tags and error bounds.

use serde::{Deserialize, Serialize};

use crate::config::Method;

/// Two-sided 99% standard normal quantile, used for all Wilson intervals.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// A probability value together with how it was obtained and how far off
/// it may be.
///
/// * `exact` estimates carry `err = 0`.
/// * `quadrature` estimates carry the grid-refinement error bound.
/// * `monte-carlo` estimates carry the 99% Wilson half-width plus the
///   sample count and seed that reproduce them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbEstimate {
    pub value: f64,
    pub method: Method,
    pub err: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ProbEstimate {
    pub fn exact(value: f64) -> Self {
        ProbEstimate { value, method: Method::Exact, err: 0.0, samples: None, seed: None }
    }

    pub fn quadrature(value: f64, err: f64) -> Self {
        ProbEstimate { value, method: Method::Quadrature, err, samples: None, seed: None }
    }

    /// Builds a Monte Carlo estimate from a success count: the value is the
    /// raw proportion, the error the 99% Wilson half-width.
    pub fn monte_carlo(successes: u64, samples: u64, seed: u64) -> Self {
        let p_hat = successes as f64 / samples as f64;
        let (lo, hi) = wilson_bounds(p_hat, samples, Z_99);
        ProbEstimate {
            value: p_hat,
            method: Method::MonteCarlo,
            err: 0.5 * (hi - lo),
            samples: Some(samples),
            seed: Some(seed),
        }
    }

    /// Whether the estimate is consistent with a reference probability:
    /// equality for exact values, the error band for quadrature, and the
    /// 99% Wilson interval for Monte Carlo.
    pub fn covers(&self, reference: f64) -> bool {
        match self.method {
            Method::Exact => self.value == reference,
            Method::Quadrature => (self.value - reference).abs() <= self.err,
            Method::MonteCarlo => {
                let n = self.samples.expect("mc estimate carries samples");
                let (lo, hi) = wilson_bounds(self.value, n, Z_99);
                (lo..=hi).contains(&reference)
            }
        }
    }
}

/// Wilson score interval for a proportion `p_hat` of `n` trials at normal
/// quantile `z`.
pub fn wilson_bounds(p_hat: f64, n: u64, z: f64) -> (f64, f64) {
    let n = n as f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}
