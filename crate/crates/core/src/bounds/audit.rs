use serde::Serialize;

use super::BoundError;
use crate::dynamics::{DynamicsError, DynamicsKind, GeneratorSpec, ObservableTrajectory};
use crate::linalg::{op_norm, std_dev};
use crate::DensityState;

/// Pointwise rate inequalities on `|d⟨O⟩/dt|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RateInequality {
    /// `(2/ħ) ΔO(t) ΔH` (closed dynamics).
    Robertson,
    /// `(2/ħ) ‖H O(t)‖_op` (closed dynamics).
    OperatorNorm,
    /// `√tr ρ² ‖dO/dt‖_hs` (any dynamics).
    PurityHs,
    /// `2 √tr ρ² Σ_i ‖K_i† O(0) K̇_i‖_hs` (Kraus dynamics).
    KrausSpeed,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityAudit {
    pub inequality: RateInequality,
    /// `max(LHS − RHS)` over interior grid points; positive means violated.
    pub max_violation: f64,
    /// Time at which the maximum occurs.
    pub at_time: f64,
    pub points: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateAudit {
    pub entries: Vec<InequalityAudit>,
}

impl RateAudit {
    pub fn max_violation(&self) -> f64 {
        self.entries.iter().map(|e| e.max_violation).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn get(&self, inequality: RateInequality) -> Option<&InequalityAudit> {
        self.entries.iter().find(|e| e.inequality == inequality)
    }
}

/// Deliberate faults for exercising the auditor in tests.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AuditMutation {
    #[default]
    None,
    FlipRobertsonSign,
}

/// Checks each applicable rate inequality on the interior grid points,
/// with `d⟨O⟩/dt` from fourth-order central differences of the sampled
/// expectations. The two samples at either end are not audited.
pub fn rate_audit(
    traj: &ObservableTrajectory<f64>,
    gen: &GeneratorSpec<f64>,
    rho: &DensityState,
) -> Result<RateAudit, BoundError> {
    rate_audit_with(traj, gen, rho, AuditMutation::None)
}

#[doc(hidden)]
pub fn rate_audit_with(
    traj: &ObservableTrajectory<f64>,
    gen: &GeneratorSpec<f64>,
    rho: &DensityState,
    mutation: AuditMutation,
) -> Result<RateAudit, BoundError> {
    let grid = &traj.grid;
    let n = traj.expect.len();
    if n < 5 {
        return Err(DynamicsError::InvalidGrid(format!("rate audit needs at least 5 samples, got {n}")).into());
    }
    let lhs = central_rate(&traj.expect, grid.spacing());
    let sqrt_p = rho.purity().sqrt();

    let mut rhs: Vec<(RateInequality, Vec<f64>)> = Vec::new();
    if traj.kind == DynamicsKind::Unitary {
        let h = gen.hamiltonian().expect("unitary dynamics carries a Hamiltonian");
        let scale = 2.0 / gen.hbar();
        let dh = std_dev(h, rho, crate::linalg::DEFAULT_TOL)?;
        let sign = if mutation == AuditMutation::FlipRobertsonSign { -1.0 } else { 1.0 };
        rhs.push((
            RateInequality::Robertson,
            traj.stddev.iter().map(|s| sign * scale * s * dh).collect(),
        ));
        let norms = traj
            .samples
            .iter()
            .map(|o| Ok(scale * op_norm(&(h * o))?))
            .collect::<Result<Vec<_>, BoundError>>()?;
        rhs.push((RateInequality::OperatorNorm, norms));
    }
    rhs.push((RateInequality::PurityHs, traj.gen_speed_hs.iter().map(|s| sqrt_p * s).collect()));
    if let Some(k) = &traj.kraus_speed_hs {
        rhs.push((RateInequality::KrausSpeed, k.iter().map(|s| 2.0 * sqrt_p * s).collect()));
    }

    let entries = rhs
        .into_iter()
        .map(|(inequality, bound)| {
            let (mut worst, mut at) = (f64::NEG_INFINITY, grid.t0());
            for k in 2..n - 2 {
                let v = lhs[k] - bound[k];
                if v > worst {
                    worst = v;
                    at = grid.time(k);
                }
            }
            InequalityAudit {
                inequality,
                max_violation: worst,
                at_time: at,
                points: n - 4,
            }
        })
        .collect();
    Ok(RateAudit { entries })
}

/// `|f'|` from the five-point stencil; zero at the two samples on each end.
fn central_rate(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for k in 2..n - 2 {
        out[k] = ((f[k - 2] - f[k + 2] + 8.0 * (f[k + 1] - f[k - 1])) / (12.0 * h)).abs();
    }
    out
}
