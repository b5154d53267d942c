use super::trajectory::TrajectoryBuilder;
use super::{
    check_observable, DynamicsError, DynamicsKind, EvolveOptions, GeneratorSpec, KrausFamily, ObservableTrajectory,
    TimeGrid,
};
use crate::linalg::{hs_norm, DensityState, Matrix};
use crate::scalar::Real;

fn as_kraus<T: Real>(gen: &GeneratorSpec<T>) -> Result<&KrausFamily<T>, DynamicsError> {
    match gen {
        GeneratorSpec::Kraus(k) => Ok(k),
        other => Err(DynamicsError::WrongKind {
            expected: "kraus",
            found: other.kind(),
        }),
    }
}

/// `K̇_i(t)` by central difference `(K_i(t+h) − K_i(t−h))/(2h)`; falls back
/// to a one-sided difference where `t ± h` leaves the family's domain.
pub fn kraus_derivative<T: Real>(gen: &GeneratorSpec<T>, i: usize, t: T, h: T) -> Result<Matrix<T>, DynamicsError> {
    derivative(as_kraus(gen)?, i, t, h)
}

fn derivative<T: Real>(family: &KrausFamily<T>, i: usize, t: T, h: T) -> Result<Matrix<T>, DynamicsError> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
    if !(h > T::zero()) || !h.is_finite() {
        return Err(DynamicsError::BadStep(h.to_f64_lossy()));
    }
    let count = family.count();
    if i >= count {
        return Err(DynamicsError::KrausIndex { index: i, count });
    }
    let (lo, hi) = family.domain();
    // Slack so grid points that sit on the domain edge up to rounding count as inside.
    let slack = h * T::lit(1e-6);
    let at = |s: T| -> Result<Matrix<T>, DynamicsError> { Ok(family.operators(s)?.swap_remove(i)) };
    let back_ok = t - h >= lo - slack;
    let fwd_ok = t + h <= hi + slack;
    let clamp = |s: T| s.max(lo).min(hi);
    match (back_ok, fwd_ok) {
        (true, true) => Ok((&at(t + h)? - &at(clamp(t - h))?).scale_real(T::one() / (h + h))),
        (false, true) => Ok((&at(t + h)? - &at(t)?).scale_real(T::one() / h)),
        (true, false) => Ok((&at(t)? - &at(clamp(t - h))?).scale_real(T::one() / h)),
        (false, false) => Err(DynamicsError::BadStep(h.to_f64_lossy())),
    }
}

/// Direct evaluation of `O(t) = Σ_i K_i†(t) O(0) K_i(t)` on `grid`.
pub fn evolve_kraus_heisenberg<T: Real>(
    o0: &Matrix<T>,
    gen: &GeneratorSpec<T>,
    rho: &DensityState<T>,
    grid: &TimeGrid<T>,
) -> Result<ObservableTrajectory<T>, DynamicsError> {
    evolve_kraus_heisenberg_with(o0, gen, rho, grid, &EvolveOptions::default())
}

pub(crate) fn evolve_kraus_heisenberg_with<T: Real>(
    o0: &Matrix<T>,
    gen: &GeneratorSpec<T>,
    rho: &DensityState<T>,
    grid: &TimeGrid<T>,
    opts: &EvolveOptions<T>,
) -> Result<ObservableTrajectory<T>, DynamicsError> {
    let family = as_kraus(gen)?;
    family.validate(opts.tol)?;
    check_observable(o0, rho, family.dim(), opts.tol)?;
    let h = family.table_spacing().unwrap_or_else(|| grid.spacing());

    let mut builder = TrajectoryBuilder::new(rho, opts, grid.len());
    let mut kraus_speed = Vec::with_capacity(grid.len());
    for t in grid.times() {
        let deviation = family.completeness_deviation(t)?;
        if deviation > opts.tol {
            return Err(DynamicsError::KrausIncomplete {
                time: t.to_f64_lossy(),
                deviation: deviation.to_f64_lossy(),
            });
        }
        let ks = family.operators(t)?;
        let mut o = Matrix::zeros(o0.dim());
        let mut rate = Matrix::zeros(o0.dim());
        let mut speed = T::zero();
        for (i, k) in ks.iter().enumerate() {
            let k_dag = k.dagger();
            let kdot = derivative(family, i, t, h)?;
            let left = &k_dag * o0;
            o += &(&left * k);
            let term = &left * &kdot;
            speed += hs_norm(&term)?;
            rate += &term;
            rate += &term.dagger();
        }
        builder.push(o, &rate)?;
        kraus_speed.push(speed);
    }
    let mut traj = builder.finish(DynamicsKind::Kraus, *grid);
    traj.kraus_speed_hs = Some(kraus_speed);
    Ok(traj)
}
