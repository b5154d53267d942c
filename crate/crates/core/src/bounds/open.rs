use super::{guarded_ratio, invalid, mean_speed, require_nonnegative, BoundError, BoundId, BoundOptions, BoundReport};
use crate::dynamics::ObservableTrajectory;
use crate::linalg::{hs_norm, Matrix};
use crate::DensityState;

/// `|⟨O(T)⟩ − ⟨O(0)⟩| / (√tr ρ² · Λ_T)` with `Λ_T` the time average of
/// `‖dO/dt‖_hs`. Valid for any dynamics and mixed states.
pub fn oqsl_generator_hs(
    traj: &ObservableTrajectory<f64>,
    rho: &DensityState,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundError> {
    let id = BoundId::GeneratorHs;
    let change = (traj.expect_final() - traj.expect_initial()).abs();
    let purity = rho.purity();
    let lambda = mean_speed(&traj.grid, &traj.gen_speed_hs);
    let t_qsl = guarded_ratio(id, change, purity.sqrt() * lambda, opts)?;
    Ok(BoundReport::new(id, traj.duration(), t_qsl, opts)
        .detail("delta_expect", change)
        .detail("purity", purity)
        .detail("mean_speed_hs", lambda))
}

/// State-based bound for open dynamics with time-independent generator:
/// `|cos θ − 1| tr ρ₀² / ‖L(ρ₀)‖_hs`, where `cos θ = tr[ρ₀ρ_T] / tr ρ₀²`.
///
/// `l_rho0_hs2` is `tr[L(ρ₀)²]`.
pub fn qsl_delcampo(
    rho0: &DensityState,
    rho_t: &DensityState,
    l_rho0_hs2: f64,
    t: f64,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundError> {
    let id = BoundId::Delcampo;
    require_nonnegative(id, "tr[L(ρ₀)²]", l_rho0_hs2)?;
    if rho0.dim() != rho_t.dim() {
        return Err(invalid(id, format!("state dimensions {} and {}", rho0.dim(), rho_t.dim())));
    }
    let p0 = rho0.purity();
    let overlap = rho0.matrix().trace_product(rho_t.matrix()).re;
    let cos_theta = overlap / p0;
    let theta = cos_theta.clamp(-1.0, 1.0).acos();
    let numerator = (cos_theta - 1.0).abs() * p0;
    let t_qsl = guarded_ratio(id, numerator, l_rho0_hs2.sqrt(), opts)?;
    Ok(BoundReport::new(id, t, t_qsl, opts)
        .detail("cos_theta", cos_theta)
        .detail("theta", theta)
        .detail("purity_0", p0)
        .detail("l_rho0_hs", l_rho0_hs2.sqrt()))
}

/// `|Δ⟨O⟩| / (2 √tr ρ² · Λ)` with `Λ` the time average of
/// `Σ_i ‖K_i† O(0) K̇_i‖_hs`.
pub fn oqsl_kraus(
    traj: &ObservableTrajectory<f64>,
    rho: &DensityState,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundError> {
    let id = BoundId::Kraus;
    let speeds = traj.kraus_speed_hs.as_deref().ok_or(BoundError::MissingData {
        bound: id,
        what: "Kraus speeds",
    })?;
    let change = (traj.expect_final() - traj.expect_initial()).abs();
    let purity = rho.purity();
    let lambda = mean_speed(&traj.grid, speeds);
    let t_qsl = guarded_ratio(id, change, 2.0 * purity.sqrt() * lambda, opts)?;
    Ok(BoundReport::new(id, traj.duration(), t_qsl, opts)
        .detail("delta_expect", change)
        .detail("purity", purity)
        .detail("mean_kraus_speed_hs", lambda))
}

/// State-independent bound `|tr[O₀ O(T)] − tr O₀²| / (‖O₀‖_hs · Λ_T)`.
pub fn oqsl_state_independent(
    o0: &Matrix<f64>,
    traj: &ObservableTrajectory<f64>,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundError> {
    let id = BoundId::StateIndep;
    if o0.dim() != traj.last().dim() {
        return Err(invalid(id, format!("observable dimension {} vs trajectory {}", o0.dim(), traj.last().dim())));
    }
    let change = (o0.trace_product(traj.last()) - o0.trace_product(o0)).norm();
    let o0_hs = hs_norm(o0)?;
    let lambda = mean_speed(&traj.grid, &traj.gen_speed_hs);
    let t_qsl = guarded_ratio(id, change, o0_hs * lambda, opts)?;
    Ok(BoundReport::new(id, traj.duration(), t_qsl, opts)
        .detail("delta_overlap", change)
        .detail("o0_hs", o0_hs)
        .detail("mean_speed_hs", lambda))
}
