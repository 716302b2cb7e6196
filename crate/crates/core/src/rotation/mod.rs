//! Continued fractions, Birkhoff sums of the symmetric-logarithm roof over an
//! irrational rotation, and their limit law.

pub mod birkhoff;
pub mod cf;

use thiserror::Error;

pub use birkhoff::{birkhoff_sum, empirical_vs_nu, fq_exact, fq_sup_error, nu_cdf, BirkhoffSample, KsReport, EPS_GUARD};
pub use cf::{alpha_from_spec, cf_build, cf_build_liouville, cf_build_with_rule, cf_expand, ContinuedFraction, Interval};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RotationError {
    #[error("precision exhausted after {depth} of {wanted} partial quotients")]
    PrecisionExhausted { depth: usize, wanted: usize },
    #[error("all {total} sample points hit the guard band")]
    AllPointsSkipped { total: usize },
    #[error("{0}")]
    BadInput(String),
}

/// Decimal digits used for irrational α; `SCS_LAB_PRECISION` overrides the default 200.
pub fn precision_digits() -> u32 {
    std::env::var("SCS_LAB_PRECISION").ok().and_then(|s| s.parse().ok()).unwrap_or(200)
}
