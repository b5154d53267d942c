use super::{
    guarded_ratio, invalid, require_nonnegative, require_positive, BoundError, BoundId, BoundOptions, BoundReport,
};
use crate::dynamics::{DynamicsKind, ObservableTrajectory};
use crate::DensityState;

/// Path-integral bound `(ħ/2ΔH) ∫ |d⟨O⟩/dt| / ΔO(t) dt` for closed dynamics.
///
/// The integral is taken cell by cell: `|⟨O⟩_{k+1} − ⟨O⟩_k|` divided by `ΔO`
/// at the cell midpoint. Cells where `ΔO` falls below `eps_var` are skipped
/// and counted in `details["cells_skipped"]`.
pub fn oqsl_mt_integral(
    traj: &ObservableTrajectory<f64>,
    delta_h: f64,
    hbar: f64,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundError> {
    let id = BoundId::MtIntegral;
    mt_integral_as(id, traj, delta_h, hbar, opts)
}

pub(super) fn mt_integral_as(
    id: BoundId,
    traj: &ObservableTrajectory<f64>,
    delta_h: f64,
    hbar: f64,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundError> {
    if traj.kind != DynamicsKind::Unitary {
        return Err(BoundError::WrongKind { bound: id, kind: traj.kind });
    }
    require_nonnegative(id, "ΔH", delta_h)?;
    require_positive(id, "hbar", hbar)?;

    let e = &traj.expect;
    let mid = traj.midpoint_stddev.as_deref();
    let mut integral = 0.0;
    let mut skipped = 0usize;
    for k in 0..e.len() - 1 {
        let change = (e[k + 1] - e[k]).abs();
        if change <= opts.zero_change {
            continue;
        }
        let sigma = match mid {
            Some(m) => m[k],
            None => 0.5 * (traj.stddev[k] + traj.stddev[k + 1]),
        };
        if sigma < opts.eps_var {
            skipped += 1;
            continue;
        }
        integral += change / sigma;
    }
    let t_qsl = guarded_ratio(id, 0.5 * hbar * integral, delta_h, opts)?;
    let mut report = BoundReport::new(id, traj.duration(), t_qsl, opts)
        .detail("delta_h", delta_h)
        .detail("path_integral", integral)
        .detail("cells_skipped", skipped as f64)
        .detail("expect_0", traj.expect_initial())
        .detail("expect_T", traj.expect_final());
    if skipped > 0 {
        report = report.note(format!("{skipped} cells with vanishing ΔO skipped"));
    }
    Ok(report)
}

fn checked_unit_interval(id: BoundId, name: &str, x: f64, lo: f64, opts: &BoundOptions) -> Result<f64, BoundError> {
    if !x.is_finite() || x < lo - opts.state_tol || x > 1.0 + opts.state_tol {
        return Err(invalid(id, format!("{name} = {x} outside [{lo}, 1]")));
    }
    Ok(x.clamp(lo, 1.0))
}

/// Bound for observables with `O² = I`: `(ħ/2ΔH) |arcsin⟨O(T)⟩ − arcsin⟨O(0)⟩|`.
pub fn oqsl_self_inverse(
    e0: f64,
    e_t: f64,
    delta_h: f64,
    hbar: f64,
    t: f64,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundError> {
    let id = BoundId::SelfInverse;
    require_nonnegative(id, "ΔH", delta_h)?;
    require_positive(id, "hbar", hbar)?;
    let a0 = checked_unit_interval(id, "⟨O(0)⟩", e0, -1.0, opts)?;
    let a_t = checked_unit_interval(id, "⟨O(T)⟩", e_t, -1.0, opts)?;
    let angle = (a_t.asin() - a0.asin()).abs();
    let numerator = if (e_t - e0).abs() <= opts.zero_change { 0.0 } else { 0.5 * hbar * angle };
    let t_qsl = guarded_ratio(id, numerator, delta_h, opts)?;
    Ok(BoundReport::new(id, t, t_qsl, opts)
        .detail("delta_h", delta_h)
        .detail("expect_0", e0)
        .detail("expect_T", e_t)
        .detail("angle", angle))
}

/// State speed limit from projector populations `p = |⟨ψ₀|ψ(t)⟩|²`:
/// `(ħ/ΔH) |arcsin√p(T) − arcsin√p(0)|`.
pub fn state_qsl_projector(
    p0: f64,
    p_t: f64,
    delta_h: f64,
    hbar: f64,
    t: f64,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundError> {
    let id = BoundId::StateMt;
    require_nonnegative(id, "ΔH", delta_h)?;
    require_positive(id, "hbar", hbar)?;
    let q0 = checked_unit_interval(id, "p(0)", p0, 0.0, opts)?;
    let q_t = checked_unit_interval(id, "p(T)", p_t, 0.0, opts)?;
    let angle = (q_t.sqrt().asin() - q0.sqrt().asin()).abs();
    let numerator = if (p_t - p0).abs() <= opts.zero_change { 0.0 } else { hbar * angle };
    let t_qsl = guarded_ratio(id, numerator, delta_h, opts)?;
    Ok(BoundReport::new(id, t, t_qsl, opts)
        .detail("delta_h", delta_h)
        .detail("p_0", p0)
        .detail("p_T", p_t)
        .detail("angle", angle))
}

/// `ħ |Δ⟨O⟩| / (2 √tr ρ² ‖O H‖_hs)`; holds for mixed states.
pub fn oqsl_purity_hs(
    e0: f64,
    e_t: f64,
    rho: &DensityState,
    oh_hs: f64,
    hbar: f64,
    t: f64,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundError> {
    let id = BoundId::PurityHs;
    require_nonnegative(id, "‖OH‖_hs", oh_hs)?;
    require_positive(id, "hbar", hbar)?;
    let change = (e_t - e0).abs();
    let purity = rho.purity();
    let t_qsl = guarded_ratio(id, hbar * change, 2.0 * purity.sqrt() * oh_hs, opts)?;
    Ok(BoundReport::new(id, t, t_qsl, opts)
        .detail("delta_expect", change)
        .detail("purity", purity)
        .detail("oh_hs", oh_hs))
}

/// `(ħ/2) |Δ⟨O⟩| / min(‖OH‖_op, ‖OH‖_tr)`. The caller must supply a pure
/// reference state; the CLI enforces this.
pub fn oqsl_min_norm(
    e0: f64,
    e_t: f64,
    oh_op: f64,
    oh_tr: f64,
    hbar: f64,
    t: f64,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundError> {
    let id = BoundId::MinNorm;
    require_nonnegative(id, "‖OH‖_op", oh_op)?;
    require_nonnegative(id, "‖OH‖_tr", oh_tr)?;
    require_positive(id, "hbar", hbar)?;
    let change = (e_t - e0).abs();
    let norm = oh_op.min(oh_tr);
    let t_qsl = guarded_ratio(id, 0.5 * hbar * change, norm, opts)?;
    Ok(BoundReport::new(id, t, t_qsl, opts)
        .detail("delta_expect", change)
        .detail("oh_op", oh_op)
        .detail("oh_tr", oh_tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_unitary_heisenberg, TimeGrid};
    use crate::linalg::{std_dev, Matrix};
    use crate::scalar::c;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    type M = Matrix<f64>;

    fn plus() -> DensityState {
        DensityState::from_ket(&[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], 1e-12).unwrap()
    }

    #[test]
    fn tight_qubit_mt_integral_is_quarter_period() {
        let rho = plus();
        let grid = TimeGrid::span(FRAC_PI_2, 4000).unwrap();
        let traj = evolve_unitary_heisenberg(&M::pauli_x(), &M::pauli_z(), &rho, &grid, 1.0).unwrap();
        let dh = std_dev(&M::pauli_z(), &rho, 1e-9).unwrap();
        let r = oqsl_mt_integral(&traj, dh, 1.0, &BoundOptions::default()).unwrap();
        assert!((r.t_qsl - FRAC_PI_2).abs() < 1e-4, "{}", r.t_qsl);
        assert!(r.valid);
    }

    #[test]
    fn tight_qubit_closed_forms() {
        let o = BoundOptions::default();
        let si = oqsl_self_inverse(1.0, -1.0, 1.0, 1.0, FRAC_PI_2, &o).unwrap();
        assert!((si.t_qsl - FRAC_PI_2).abs() < 1e-12);
        let st = state_qsl_projector(1.0, 0.0, 1.0, 1.0, FRAC_PI_2, &o).unwrap();
        assert!((st.t_qsl - FRAC_PI_2).abs() < 1e-12);
        let hs = oqsl_purity_hs(1.0, -1.0, &plus(), 2f64.sqrt(), 1.0, FRAC_PI_2, &o).unwrap();
        assert!((hs.t_qsl - FRAC_1_SQRT_2).abs() < 1e-12);
        let mn = oqsl_min_norm(1.0, -1.0, 1.0, 2.0, 1.0, FRAC_PI_2, &o).unwrap();
        assert!((mn.t_qsl - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_change_gives_zero_even_without_spread() {
        let o = BoundOptions::default();
        assert_eq!(oqsl_self_inverse(0.3, 0.3, 0.0, 1.0, 1.0, &o).unwrap().t_qsl, 0.0);
        assert_eq!(state_qsl_projector(1.0, 1.0, 0.0, 1.0, 1.0, &o).unwrap().t_qsl, 0.0);
        assert!(matches!(
            oqsl_self_inverse(1.0, -1.0, 0.0, 1.0, 1.0, &o),
            Err(BoundError::UnboundedSpeed { .. })
        ));
    }

    #[test]
    fn range_checks() {
        let o = BoundOptions::default();
        assert!(oqsl_self_inverse(1.1, 0.0, 1.0, 1.0, 1.0, &o).is_err());
        assert!(state_qsl_projector(-0.2, 0.0, 1.0, 1.0, 1.0, &o).is_err());
        assert!(oqsl_self_inverse(1.0, 0.0, -1.0, 1.0, 1.0, &o).is_err());
        // Tiny overshoot from rounding is clamped.
        let r = oqsl_self_inverse(1.0 + 1e-12, -1.0, 1.0, 1.0, PI, &o).unwrap();
        assert!((r.t_qsl - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn mt_integral_rejects_open_dynamics() {
        let rho = plus();
        let grid = TimeGrid::span(1.0, 10).unwrap();
        let gen = crate::dynamics::GeneratorSpec::Lindblad(crate::dynamics::Lindblad::qubit_dephasing(1.0));
        let traj = crate::dynamics::evolve_heisenberg(&M::pauli_x(), &gen, &rho, &grid, &Default::default()).unwrap();
        assert!(matches!(
            oqsl_mt_integral(&traj, 1.0, 1.0, &BoundOptions::default()),
            Err(BoundError::WrongKind { .. })
        ));
    }
}
