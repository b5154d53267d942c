use num_complex::Complex;

use super::generator::{check_hbar, hamiltonian_action};
use super::trajectory::TrajectoryBuilder;
use super::{check_observable, DynamicsError, DynamicsKind, EvolveOptions, ObservableTrajectory, TimeGrid};
use crate::linalg::{expm, require_hermitian, std_dev, DensityState, Matrix, DEFAULT_TOL};
use crate::scalar::Real;

/// `U(t) = e^{−iHt/ħ}` for Hermitian `H`.
pub fn unitary_propagator<T: Real>(h: &Matrix<T>, t: T, hbar: T) -> Result<Matrix<T>, DynamicsError> {
    check_hbar(hbar)?;
    require_hermitian(h, T::lit(DEFAULT_TOL)).map_err(|_| DynamicsError::NonHermitianHamiltonian)?;
    unitary_propagator_unchecked(h, t, hbar)
}

pub(crate) fn unitary_propagator_unchecked<T: Real>(h: &Matrix<T>, t: T, hbar: T) -> Result<Matrix<T>, DynamicsError> {
    Ok(expm(&h.scale(Complex::new(T::zero(), -t / hbar)))?)
}

/// Exact Heisenberg trajectory `O(t) = U†(t) O(0) U(t)` sampled on `grid`,
/// with `t` measured from `grid.t0()`.
pub fn evolve_unitary_heisenberg<T: Real>(
    o0: &Matrix<T>,
    h: &Matrix<T>,
    rho: &DensityState<T>,
    grid: &TimeGrid<T>,
    hbar: T,
) -> Result<ObservableTrajectory<T>, DynamicsError> {
    evolve_unitary_heisenberg_with(o0, h, hbar, rho, grid, &EvolveOptions::default())
}

pub(crate) fn evolve_unitary_heisenberg_with<T: Real>(
    o0: &Matrix<T>,
    h: &Matrix<T>,
    hbar: T,
    rho: &DensityState<T>,
    grid: &TimeGrid<T>,
    opts: &EvolveOptions<T>,
) -> Result<ObservableTrajectory<T>, DynamicsError> {
    check_hbar(hbar)?;
    require_hermitian(h, opts.tol).map_err(|_| DynamicsError::NonHermitianHamiltonian)?;
    check_observable(o0, rho, h.dim(), opts.tol)?;

    let heisenberg = |t: T| -> Result<Matrix<T>, DynamicsError> {
        let u = unitary_propagator_unchecked(h, t - grid.t0(), hbar)?;
        Ok(&(&u.dagger() * o0) * &u)
    };

    let mut builder = TrajectoryBuilder::new(rho, opts, grid.len());
    for t in grid.times() {
        let o = heisenberg(t)?;
        let rate = hamiltonian_action(h, &o, hbar)?;
        builder.push(o, &rate)?;
    }
    let mut mid = Vec::with_capacity(grid.steps());
    let half = T::lit(0.5);
    for k in 0..grid.steps() {
        let o = heisenberg((grid.time(k) + grid.time(k + 1)) * half)?;
        mid.push(std_dev(&o, rho, opts.tol)?);
    }
    let mut traj = builder.finish(DynamicsKind::Unitary, *grid);
    traj.midpoint_stddev = Some(mid);
    Ok(traj)
}
