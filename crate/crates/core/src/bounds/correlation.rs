use num_complex::Complex64;

use super::{guarded_ratio, invalid, mean_speed, require_nonnegative, require_positive, require_pure};
use super::{BoundError, BoundId, BoundOptions, BoundReport};
use crate::dynamics::{DynamicsKind, ObservableTrajectory, TimeGrid};
use crate::linalg::{commutator, op_norm, trace_with, Matrix};
use crate::DensityState;

/// Which generator produced the speeds: `closed` uses `‖[H, A(t)]‖_op`,
/// `open` uses `‖L†[A(t)]‖_op`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpeedKind {
    Closed,
    Open,
}

impl SpeedKind {
    /// Speed samples in the convention `corr_qsl` expects.
    pub fn speeds(self, traj: &ObservableTrajectory<f64>, hbar: f64) -> Vec<f64> {
        match self {
            SpeedKind::Closed => traj.gen_speed_op.iter().map(|s| s * hbar).collect(),
            SpeedKind::Open => traj.gen_speed_op.clone(),
        }
    }

    /// With `hbar` absorbed into `L†`, the open prefactor is `1/2`.
    fn prefactor(self, hbar: f64) -> f64 {
        match self {
            SpeedKind::Closed => 0.5 * hbar,
            SpeedKind::Open => 0.5,
        }
    }

    fn matches(self, kind: DynamicsKind) -> bool {
        match self {
            SpeedKind::Closed => kind == DynamicsKind::Unitary,
            SpeedKind::Open => kind != DynamicsKind::Unitary,
        }
    }
}

/// `C(t) = ⟨A(t) A(0)⟩ − ⟨A(t)⟩⟨A(0)⟩` on the trajectory grid.
#[derive(Clone, Debug)]
pub struct CorrelationTrace {
    pub grid: TimeGrid<f64>,
    pub kind: DynamicsKind,
    pub values: Vec<Complex64>,
}

impl CorrelationTrace {
    pub fn initial(&self) -> Complex64 {
        self.values[0]
    }

    pub fn last(&self) -> Complex64 {
        self.values[self.values.len() - 1]
    }
}

pub fn two_time_correlation(
    a0: &Matrix<f64>,
    traj: &ObservableTrajectory<f64>,
    rho: &DensityState,
    opts: &BoundOptions,
) -> Result<CorrelationTrace, BoundError> {
    let id = BoundId::CorrClosed;
    require_pure(id, rho, opts)?;
    if a0.dim() != rho.dim() || traj.initial().dim() != rho.dim() {
        return Err(invalid(id, "dimension mismatch between A, trajectory and state"));
    }
    let mean0 = trace_with(a0, rho)?;
    let values = traj
        .samples
        .iter()
        .map(|a| Ok(trace_with(&(a * a0), rho)? - trace_with(a, rho)? * mean0))
        .collect::<Result<Vec<_>, BoundError>>()?;
    Ok(CorrelationTrace {
        grid: traj.grid,
        kind: traj.kind,
        values,
    })
}

/// `prefactor · |C(T) − C(0)| / (‖A(0)‖_op · mean speed)`, with the complex
/// difference measured by its modulus.
pub fn corr_qsl(
    trace: &CorrelationTrace,
    a0_op: f64,
    speeds_op: &[f64],
    hbar: f64,
    kind: SpeedKind,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundError> {
    let id = match kind {
        SpeedKind::Closed => BoundId::CorrClosed,
        SpeedKind::Open => BoundId::CorrOpen,
    };
    require_nonnegative(id, "‖A(0)‖_op", a0_op)?;
    require_positive(id, "hbar", hbar)?;
    if !kind.matches(trace.kind) {
        return Err(BoundError::WrongKind { bound: id, kind: trace.kind });
    }
    if speeds_op.len() != trace.values.len() {
        return Err(invalid(id, format!("{} speeds for {} samples", speeds_op.len(), trace.values.len())));
    }
    let (c0, ct) = (trace.initial(), trace.last());
    let change = (ct - c0).norm();
    let speed = mean_speed(&trace.grid, speeds_op);
    let t_qsl = guarded_ratio(id, kind.prefactor(hbar) * change, a0_op * speed, opts)?;
    Ok(BoundReport::new(id, trace.grid.duration(), t_qsl, opts)
        .detail("c0_re", c0.re)
        .detail("c0_im", c0.im)
        .detail("cT_re", ct.re)
        .detail("cT_im", ct.im)
        .detail("delta_c_modulus", change)
        .detail("a0_op", a0_op)
        .detail("mean_speed_op", speed))
}

/// Bound on the growth of `⟨[B(0), A(t)]⟩`:
/// `prefactor · |⟨O(T)⟩ − ⟨O(0)⟩| / (‖B(0)‖_op · mean speed)` with
/// `O(t) = [B(0), A(t)]` and `A(t)` taken from `traj`.
pub fn commutator_qsl(
    b0: &Matrix<f64>,
    traj: &ObservableTrajectory<f64>,
    rho: &DensityState,
    hbar: f64,
    kind: SpeedKind,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundError> {
    let id = match kind {
        SpeedKind::Closed => BoundId::CommClosed,
        SpeedKind::Open => BoundId::CommOpen,
    };
    require_positive(id, "hbar", hbar)?;
    require_pure(id, rho, opts)?;
    if !kind.matches(traj.kind) {
        return Err(BoundError::WrongKind { bound: id, kind: traj.kind });
    }
    if b0.dim() != rho.dim() {
        return Err(invalid(id, format!("B is {}-dimensional, state {}", b0.dim(), rho.dim())));
    }
    let o0 = trace_with(&commutator(b0, traj.initial())?, rho)?;
    let ot = trace_with(&commutator(b0, traj.last())?, rho)?;
    let change = (ot - o0).norm();
    let b0_op = op_norm(b0)?;
    let speed = mean_speed(&traj.grid, &kind.speeds(traj, hbar));
    let t_qsl = guarded_ratio(id, kind.prefactor(hbar) * change, b0_op * speed, opts)?;
    Ok(BoundReport::new(id, traj.duration(), t_qsl, opts)
        .detail("comm_0_re", o0.re)
        .detail("comm_0_im", o0.im)
        .detail("comm_T_re", ot.re)
        .detail("comm_T_im", ot.im)
        .detail("delta_comm_modulus", change)
        .detail("b0_op", b0_op)
        .detail("mean_speed_op", speed))
}
