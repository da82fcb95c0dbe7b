//! Tolerances and size limits shared by every module.

use serde::{Deserialize, Serialize};

/// Numerical tolerances and budgets. `Tolerances::default()` holds the
/// values the checks and tests are calibrated against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative tolerance on `A^2 - |B|^2 = 1`, measured against `A^2`.
    pub invariant_rel: f64,
    /// Relative tolerance on `|a|^2 - |b|^2 = 1` for values produced by
    /// products and polynomial evaluation.
    pub membership_rel: f64,
    /// Relative residual allowed for the exact energy identities.
    pub identity_rel: f64,
    /// Pointwise agreement of two evaluation routes.
    pub pointwise: f64,
    /// Relative tolerance used when computing `C_p`.
    pub cp_rel: f64,
    /// Relative slack on the Chebyshev / `C_p` bound.
    pub bound_slack: f64,
    /// Relative slack on the autocorrelation bound.
    pub autocorrelation_slack: f64,
    /// Largest number of factors in one window.
    pub max_factors: usize,
    /// Largest window for single-target representation queries.
    pub max_query_window: usize,
    /// Largest window for the all-targets representation checks.
    pub max_exhaustive_window: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            invariant_rel: 1e-12,
            membership_rel: 1e-10,
            identity_rel: 1e-12,
            pointwise: 1e-10,
            cp_rel: 1e-8,
            bound_slack: 1e-6,
            autocorrelation_slack: 1e-9,
            max_factors: 24,
            max_query_window: 22,
            max_exhaustive_window: 14,
        }
    }
}
