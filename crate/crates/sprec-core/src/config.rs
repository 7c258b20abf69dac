//! Shared engine configuration: grids, tolerances, Monte Carlo sizing and
//! tie conventions.

use serde::{Deserialize, Serialize};

/// How a probability was (or should be) computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Quadrature,
    MonteCarlo,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte-carlo",
        })
    }
}

/// Tie handling for ordering events over discrete variables.
///
/// `Weak` uses non-strict inequalities, matching the order definitions
/// literally; with shared atoms the n! events then overlap and their
/// probabilities can sum above 1. `Strict` excludes ties, which keeps the
/// events disjoint and comparable with Monte Carlo classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieConvention {
    Strict,
    Weak,
}

/// Knobs shared by the order engines.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Grid points for monotonicity / pointwise-dominance checks.
    pub order_grid_points: usize,
    /// Base interval count for the composite-trapezoid quadrature.
    pub quad_intervals: usize,
    /// Interval cap: refinement doubles the grid up to this count before
    /// declaring nonconvergence.
    pub quad_max_intervals: usize,
    /// Absolute tolerance on the quadrature error estimate.
    pub quad_tol: f64,
    /// Support truncation quantile: grids span quantile(q) .. quantile(1-q).
    pub trunc_quantile: f64,
    /// Slack absorbing floating-point noise in grid comparisons.
    pub slack: f64,
    /// Verdicts become indeterminate when the margin is below
    /// `guard_factor` x the method error.
    pub guard_factor: f64,
    /// Monte Carlo sample count.
    pub mc_samples: u64,
    /// Seed for all Monte Carlo streams.
    pub seed: u64,
    /// Tie convention for discrete ordering events.
    pub tie_convention: TieConvention,
    /// Factorial cap for permutation tables (n! entries).
    pub perm_cap: usize,
    /// Transposition sample budget for the pairwise-swap audit.
    pub audit_budget: usize,
    /// Allow the final-pair hazard-rate audit on sequences longer than 3
    /// (experimental probe; the n = 3 case is the supported one).
    pub hr_swap_any_n: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            order_grid_points: 4096,
            quad_intervals: 2048,
            quad_max_intervals: 1 << 16,
            quad_tol: 1e-6,
            trunc_quantile: 1e-9,
            slack: 1e-12,
            guard_factor: 3.0,
            mc_samples: 1_000_000,
            seed: 0,
            tie_convention: TieConvention::Strict,
            perm_cap: 8,
            audit_budget: 1000,
            hr_swap_any_n: false,
        }
    }
}

impl EngineConfig {
    /// Indeterminacy guard for an estimate with method error `err`.
    pub(crate) fn guard(&self, err: f64) -> f64 {
        self.guard_factor * err + self.slack
    }

    /// Monte Carlo base stream, keyed by the configured seed.
    pub(crate) fn mc_rng(&self) -> crate::rng::Rng {
        crate::rng::Rng::new(self.seed, 0)
    }
}
