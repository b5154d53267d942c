use super::unitary::mt_integral_as;
use super::{guarded_ratio, invalid, require_pure, BoundError, BoundId, BoundOptions, BoundReport};
use crate::dynamics::{evolve_unitary_heisenberg, TimeGrid};
use crate::linalg::{hs_norm, op_norm, std_dev, tr_norm, Matrix};
use crate::DensityState;

/// Charging-time bounds for a battery `H_B` driven by `H_C`.
///
/// `H_B(t)` is evolved under `H_T = H_B + H_C`. The first report is the
/// path-integral form with `ΔH_T`; the second is
/// `(ħ/2) |Δ⟨H_B⟩| / min(‖H_B H_T‖_op, ‖H_B H_T‖_hs, ‖H_B H_T‖_tr)` and
/// requires a pure state.
pub fn battery_bounds(
    hb: &Matrix<f64>,
    hc: &Matrix<f64>,
    rho: &DensityState,
    grid: &TimeGrid<f64>,
    hbar: f64,
    opts: &BoundOptions,
) -> Result<(BoundReport, BoundReport), BoundError> {
    if hb.dim() != hc.dim() {
        return Err(invalid(BoundId::BatteryCt1, format!("H_B is {}-dimensional, H_C {}", hb.dim(), hc.dim())));
    }
    require_pure(BoundId::BatteryCt2, rho, opts)?;
    let ht = hb + hc;
    let traj = evolve_unitary_heisenberg(hb, &ht, rho, grid, hbar)?;
    let delta_ht = std_dev(&ht, rho, opts.state_tol)?;
    let ct1 = mt_integral_as(BoundId::BatteryCt1, &traj, delta_ht, hbar, opts)?;

    let id = BoundId::BatteryCt2;
    let product = hb * &ht;
    let (op, hs, tr) = (op_norm(&product)?, hs_norm(&product)?, tr_norm(&product)?);
    let change = (traj.expect_final() - traj.expect_initial()).abs();
    let t_qsl = guarded_ratio(id, 0.5 * hbar * change, op.min(hs).min(tr), opts)?;
    let ct2 = BoundReport::new(id, traj.duration(), t_qsl, opts)
        .detail("delta_energy", change)
        .detail("hbht_op", op)
        .detail("hbht_hs", hs)
        .detail("hbht_tr", tr)
        .detail("delta_ht", delta_ht);
    Ok((ct1, ct2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    type M = Matrix<f64>;

    #[test]
    fn charging_protocol_respects_bounds() {
        let rho = DensityState::basis(2, 1).unwrap();
        for t in [0.3, 1.0, 2.5] {
            let grid = TimeGrid::span(t, 2000).unwrap();
            let (ct1, ct2) = battery_bounds(&M::pauli_z(), &M::pauli_x(), &rho, &grid, 1.0, &BoundOptions::default()).unwrap();
            assert!(ct1.valid && ct2.valid, "{t}: {} {}", ct1.t_qsl, ct2.t_qsl);
            assert!(ct1.t_qsl > 0.0 && ct2.t_qsl > 0.0);
        }
    }

    #[test]
    fn commuting_drive_gives_zero() {
        let plus = DensityState::from_ket(
            &[crate::scalar::c(std::f64::consts::FRAC_1_SQRT_2, 0.0), crate::scalar::c(std::f64::consts::FRAC_1_SQRT_2, 0.0)],
            1e-12,
        )
        .unwrap();
        let grid = TimeGrid::span(FRAC_PI_4, 500).unwrap();
        let (ct1, ct2) = battery_bounds(&M::pauli_z(), &M::pauli_z(), &plus, &grid, 1.0, &BoundOptions::default()).unwrap();
        assert_eq!(ct1.t_qsl, 0.0);
        assert_eq!(ct2.t_qsl, 0.0);
    }

    #[test]
    fn mixed_state_rejected() {
        let grid = TimeGrid::span(1.0, 10).unwrap();
        let r = battery_bounds(&M::pauli_z(), &M::pauli_x(), &DensityState::maximally_mixed(2), &grid, 1.0, &BoundOptions::default());
        assert!(matches!(r, Err(BoundError::NotPure { .. })));
    }
}
