//! Ordering-event probabilities and stochastic-order decisions for
//! sequences of independent random variables.
//!
//! The crate has four layers:
//!
//! * [`dist`] — the random-variable abstraction: parametric continuous
//!   families and finite discrete atom sets, with pdf/cdf/survival/hazard,
//!   quantiles and deterministic inverse-cdf sampling.
//! * [`pairwise`] — the four pairwise orders (likelihood ratio, hazard
//!   rate, usual stochastic, stochastic precedence) and the precedence
//!   probability `P(T2 >= T1)` by exact, quadrature and Monte Carlo routes.
//! * [`sequence`] — permutation-event probabilities
//!   `P(T_{s(1)} <= ... <= T_{s(n)})`, the sequential stochastic precedence
//!   (SSP) and chain-SP (CSP) orders, plus [`audit`]s of the ordering
//!   relations between them and a randomized counterexample search.
//! * [`reliability`] — the SP ratio for coupled system lifetimes and the
//!   three-component series-parallel allocation comparison.
//!
//! All computations are deterministic: Monte Carlo runs on counter-based
//! [`rng::Rng`] streams keyed by `(seed, stream)`, so every estimate is
//! reproducible bit-for-bit from its reported configuration.

pub mod audit;
pub mod config;
pub mod dist;
pub mod error;
pub mod estimate;
pub mod pairwise;
pub mod reliability;
pub mod rng;
pub mod sequence;
pub mod special;

mod exact;
mod quad;

pub use audit::{audit_claim, search_counterexample, AuditReport, ClaimId, Holds, InstanceSpace, SearchOutcome, Witness};
pub use config::{EngineConfig, Method, TieConvention};
pub use dist::{make_distribution, AtomSpec, DistSpec, Distribution, FamilySpec, Functional};
pub use error::Error;
pub use estimate::ProbEstimate;
pub use pairwise::{
    auto_pair_method, check_hr, check_lr, check_sp, check_st, hr_hazard_verdict, hr_ratio_verdict,
    sp_pair, sp_probability, Direction, OrderVerdict, Relation,
};
pub use reliability::{series_parallel_compare, sp_ratio, AllocationComparison, AllocationSpec};
pub use rng::Rng;
pub use sequence::{
    auto_seq_method, check_csp, check_ssp, perm_probability, perm_table, transposition_compare,
    CspReport, Orientation, PairSpVerdict, PermEntry, PermProbTable, Permutation, SspReport,
    TranspositionOutcome,
};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
