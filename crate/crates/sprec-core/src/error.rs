//! Error type shared by all engines.

use thiserror::Error;

/// Everything that can go wrong while building distributions or running
/// the order engines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Malformed distribution or configuration parameter (bad user input).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Hazard rate requested at a point where the survival function is zero.
    #[error("hazard undefined at t = {t}: survival function is zero")]
    HazardUndefined { t: f64 },

    /// Both densities vanish on the whole comparison grid.
    #[error("degenerate support: both densities vanish on the comparison grid")]
    DegenerateSupport,

    /// The requested method cannot handle the given distribution kinds.
    #[error("method unsupported: {0}")]
    MethodUnsupported(String),

    /// Quadrature error estimate stayed above tolerance at the maximum grid.
    #[error("quadrature did not converge: err {err:.3e} > tol {tol:.3e} at {intervals} intervals")]
    Nonconvergence { err: f64, tol: f64, intervals: usize },

    /// Permutation-table request beyond the configured factorial cap.
    #[error("{n} variables exceed the permutation cap of {cap} (n! table size)")]
    TooManyVariables { n: usize, cap: usize },

    /// An audit was asked to assume a hypothesis it could not certify.
    #[error("precondition not established: {0}")]
    PreconditionNotEstablished(String),

    /// `sp_ratio` with both event probabilities zero.
    #[error("sp ratio undefined: both probabilities are zero")]
    BothZero,

    /// Not a permutation of 1..=n.
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
}
