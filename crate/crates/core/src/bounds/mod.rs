//! Speed-limit bounds on observable evolution time and their validity checks.
//!
//! Every evaluator returns a [`BoundReport`] holding the lower bound
//! `t_qsl`, the actual elapsed time `T`, and `valid = T ≥ t_qsl − tol`.
//! A bound whose numerator (the change being bounded) vanishes is exactly 0;
//! a vanishing denominator with a nonzero numerator is an error.

mod audit;
mod battery;
mod correlation;
mod open;
mod unitary;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use audit::{rate_audit, rate_audit_with, AuditMutation, InequalityAudit, RateAudit, RateInequality};
pub use battery::battery_bounds;
pub use correlation::{commutator_qsl, corr_qsl, two_time_correlation, CorrelationTrace, SpeedKind};
pub use open::{oqsl_generator_hs, oqsl_kraus, oqsl_state_independent, qsl_delcampo};
pub use unitary::{oqsl_min_norm, oqsl_mt_integral, oqsl_purity_hs, oqsl_self_inverse, state_qsl_projector};

use crate::dynamics::{DynamicsError, DynamicsKind};
use crate::linalg::LinalgError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundId {
    MtIntegral,
    SelfInverse,
    StateMt,
    PurityHs,
    MinNorm,
    GeneratorHs,
    Delcampo,
    Kraus,
    StateIndep,
    BatteryCt1,
    BatteryCt2,
    CorrClosed,
    CorrOpen,
    CommClosed,
    CommOpen,
}

impl BoundId {
    pub const ALL: [BoundId; 15] = [
        BoundId::MtIntegral,
        BoundId::SelfInverse,
        BoundId::StateMt,
        BoundId::PurityHs,
        BoundId::MinNorm,
        BoundId::GeneratorHs,
        BoundId::Delcampo,
        BoundId::Kraus,
        BoundId::StateIndep,
        BoundId::BatteryCt1,
        BoundId::BatteryCt2,
        BoundId::CorrClosed,
        BoundId::CorrOpen,
        BoundId::CommClosed,
        BoundId::CommOpen,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::MtIntegral => "MT_INTEGRAL",
            BoundId::SelfInverse => "SELF_INVERSE",
            BoundId::StateMt => "STATE_MT",
            BoundId::PurityHs => "PURITY_HS",
            BoundId::MinNorm => "MIN_NORM",
            BoundId::GeneratorHs => "GENERATOR_HS",
            BoundId::Delcampo => "DELCAMPO",
            BoundId::Kraus => "KRAUS",
            BoundId::StateIndep => "STATE_INDEP",
            BoundId::BatteryCt1 => "BATTERY_CT1",
            BoundId::BatteryCt2 => "BATTERY_CT2",
            BoundId::CorrClosed => "CORR_CLOSED",
            BoundId::CorrOpen => "CORR_OPEN",
            BoundId::CommClosed => "COMM_CLOSED",
            BoundId::CommOpen => "COMM_OPEN",
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown bound id `{0}`")]
pub struct UnknownBoundId(pub String);

impl FromStr for BoundId {
    type Err = UnknownBoundId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BoundId::ALL
            .iter()
            .copied()
            .find(|b| b.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownBoundId(s.to_string()))
    }
}

/// One bound evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_id: BoundId,
    #[serde(rename = "T")]
    pub t: f64,
    pub t_qsl: f64,
    pub valid: bool,
    /// Intermediate quantities (speeds, norms, endpoint expectations).
    pub details: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs_digest: Option<String>,
}

impl BoundReport {
    fn new(bound_id: BoundId, t: f64, t_qsl: f64, opts: &BoundOptions) -> Self {
        Self {
            bound_id,
            t,
            t_qsl,
            valid: t >= t_qsl - opts.valid_tol,
            details: BTreeMap::new(),
            notes: Vec::new(),
            inputs_digest: None,
        }
    }

    fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    /// `T − t_qsl`; negative means the bound was violated.
    pub fn slack(&self) -> f64 {
        self.t - self.t_qsl
    }
}

/// Tolerances governing bound evaluation.
#[derive(Clone, Copy, Debug)]
pub struct BoundOptions {
    /// `valid` holds when `T ≥ t_qsl − valid_tol`.
    pub valid_tol: f64,
    /// Cells with midpoint `ΔO` below this are skipped in the path integral.
    pub eps_var: f64,
    /// Changes of at most this magnitude count as no change.
    pub zero_change: f64,
    /// Tolerance for state checks (purity, probability and expectation ranges).
    pub state_tol: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            valid_tol: 1e-6,
            eps_var: 1e-12,
            zero_change: 1e-12,
            state_tol: 1e-9,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("{bound}: {reason}")]
    InvalidInput { bound: BoundId, reason: String },
    #[error("{bound}: zero speed with nonzero change {change:e} (unbounded speed)")]
    UnboundedSpeed { bound: BoundId, change: f64 },
    #[error("{bound}: requires a pure state (purity {purity})")]
    NotPure { bound: BoundId, purity: f64 },
    #[error("{bound}: not applicable to {kind:?} dynamics")]
    WrongKind { bound: BoundId, kind: DynamicsKind },
    #[error("{bound}: trajectory lacks {what}")]
    MissingData { bound: BoundId, what: &'static str },
}

fn invalid(bound: BoundId, reason: impl Into<String>) -> BoundError {
    BoundError::InvalidInput {
        bound,
        reason: reason.into(),
    }
}

/// `numerator / denominator` under the zero-change convention.
fn guarded_ratio(bound: BoundId, numerator: f64, denominator: f64, opts: &BoundOptions) -> Result<f64, BoundError> {
    if !numerator.is_finite() || !denominator.is_finite() || denominator < 0.0 {
        return Err(invalid(bound, format!("non-finite or negative terms ({numerator}, {denominator})")));
    }
    if numerator <= opts.zero_change {
        return Ok(0.0);
    }
    if denominator == 0.0 {
        return Err(BoundError::UnboundedSpeed {
            bound,
            change: numerator,
        });
    }
    Ok(numerator / denominator)
}

fn require_positive(bound: BoundId, name: &str, x: f64) -> Result<(), BoundError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(bound, format!("{name} must be positive, got {x}")))
    }
}

fn require_nonnegative(bound: BoundId, name: &str, x: f64) -> Result<(), BoundError> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(invalid(bound, format!("{name} must be non-negative, got {x}")))
    }
}

fn require_pure(bound: BoundId, rho: &crate::DensityState, opts: &BoundOptions) -> Result<(), BoundError> {
    if rho.is_pure(opts.state_tol) {
        Ok(())
    } else {
        Err(BoundError::NotPure {
            bound,
            purity: rho.purity(),
        })
    }
}

/// Time average `(1/T)∫ speed dt` by the trapezoid rule on the trajectory grid.
fn mean_speed(grid: &crate::dynamics::TimeGrid<f64>, speeds: &[f64]) -> f64 {
    grid.trapezoid(speeds) / grid.duration()
}
