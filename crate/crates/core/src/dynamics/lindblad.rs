use num_complex::Complex;

use super::generator::hamiltonian_action;
use super::trajectory::TrajectoryBuilder;
use super::{
    check_observable, DynamicsError, DynamicsKind, EvolveOptions, GeneratorSpec, Lindblad, ObservableTrajectory,
    TimeGrid,
};
use crate::linalg::{anticommutator, DensityState, Matrix};
use crate::scalar::Real;

fn as_lindblad<T: Real>(gen: &GeneratorSpec<T>) -> Result<&Lindblad<T>, DynamicsError> {
    match gen {
        GeneratorSpec::Lindblad(l) => Ok(l),
        other => Err(DynamicsError::WrongKind {
            expected: "lindblad",
            found: other.kind(),
        }),
    }
}

/// Adjoint Lindbladian
/// `L†[O] = (i/ħ)[H, O] + Σ_k γ_k(t) (L_k† O L_k − ½{L_k† L_k, O})`.
pub fn lindblad_adjoint<T: Real>(gen: &GeneratorSpec<T>, o: &Matrix<T>, t: T) -> Result<Matrix<T>, DynamicsError> {
    let l = as_lindblad(gen)?;
    l.validate(T::lit(crate::linalg::DEFAULT_TOL))?;
    l.hamiltonian.check_dim(o)?;
    lindblad_adjoint_unchecked(l, o, t)
}

pub(crate) fn lindblad_adjoint_unchecked<T: Real>(l: &Lindblad<T>, o: &Matrix<T>, t: T) -> Result<Matrix<T>, DynamicsError> {
    let mut out = hamiltonian_action(&l.hamiltonian, o, l.hbar)?;
    let half = T::lit(0.5);
    for jump in &l.jumps {
        let g = jump.rate.at(t);
        if g == T::zero() {
            continue;
        }
        let lk = &jump.operator;
        let lk_dag = lk.dagger();
        let sandwich = &(&lk_dag * o) * lk;
        let anti = anticommutator(&(&lk_dag * lk), o)?;
        out += &(&sandwich - &anti.scale_real(half)).scale_real(g);
    }
    Ok(out)
}

/// Schrödinger-picture Lindbladian
/// `L[ρ] = −(i/ħ)[H, ρ] + Σ_k γ_k(t) (L_k ρ L_k† − ½{L_k† L_k, ρ})`.
pub fn lindblad_generator<T: Real>(l: &Lindblad<T>, rho: &Matrix<T>, t: T) -> Result<Matrix<T>, DynamicsError> {
    let mut out = -hamiltonian_action(&l.hamiltonian, rho, l.hbar)?;
    let half = T::lit(0.5);
    for jump in &l.jumps {
        let g = jump.rate.at(t);
        if g == T::zero() {
            continue;
        }
        let lk = &jump.operator;
        let lk_dag = lk.dagger();
        let sandwich = &(lk * rho) * &lk_dag;
        let anti = anticommutator(&(&lk_dag * lk), rho)?;
        out += &(&sandwich - &anti.scale_real(half)).scale_real(g);
    }
    Ok(out)
}

/// One classical RK4 step of `dX/dt = f(t, X)`.
fn rk4_step<T: Real>(
    x: &Matrix<T>,
    t: T,
    h: T,
    f: &impl Fn(&Matrix<T>, T) -> Result<Matrix<T>, DynamicsError>,
) -> Result<Matrix<T>, DynamicsError> {
    let half = T::lit(0.5);
    let k1 = f(x, t)?;
    let k2 = f(&(x + &k1.scale_real(h * half)), t + h * half)?;
    let k3 = f(&(x + &k2.scale_real(h * half)), t + h * half)?;
    let k4 = f(&(x + &k3.scale_real(h)), t + h)?;
    let mut incr = &k1 + &k4;
    incr += &(&k2 + &k3).scale_real(T::lit(2.0));
    Ok(x + &incr.scale_real(h / T::lit(6.0)))
}

fn check_blowup<T: Real>(x: &Matrix<T>, t: T, limit: T) -> Result<(), DynamicsError> {
    let m = x.max_abs();
    if !m.is_finite() || m > limit {
        return Err(DynamicsError::Unstable {
            time: t.to_f64_lossy(),
            magnitude: m.to_f64_lossy(),
        });
    }
    Ok(())
}

/// RK4 integration of `dO/dt = L†[O]` on `grid`.
pub fn evolve_lindblad_heisenberg<T: Real>(
    o0: &Matrix<T>,
    gen: &GeneratorSpec<T>,
    rho: &DensityState<T>,
    grid: &TimeGrid<T>,
) -> Result<ObservableTrajectory<T>, DynamicsError> {
    evolve_lindblad_heisenberg_with(o0, gen, rho, grid, &EvolveOptions::default())
}

pub(crate) fn evolve_lindblad_heisenberg_with<T: Real>(
    o0: &Matrix<T>,
    gen: &GeneratorSpec<T>,
    rho: &DensityState<T>,
    grid: &TimeGrid<T>,
    opts: &EvolveOptions<T>,
) -> Result<ObservableTrajectory<T>, DynamicsError> {
    let l = as_lindblad(gen)?;
    l.validate(opts.tol)?;
    check_observable(o0, rho, l.dim(), opts.tol)?;

    let f = |x: &Matrix<T>, t: T| lindblad_adjoint_unchecked(l, x, t);
    let h = grid.spacing();
    let mut builder = TrajectoryBuilder::new(rho, opts, grid.len());
    let mut o = o0.clone();
    for k in 0..grid.len() {
        let t = grid.time(k);
        let rate = f(&o, t)?;
        let next = if k + 1 < grid.len() {
            let n = rk4_step(&o, t, h, &f)?;
            check_blowup(&n, t + h, opts.blowup)?;
            Some(n)
        } else {
            None
        };
        builder.push(o, &rate)?;
        match next {
            Some(n) => o = n,
            None => break,
        }
    }
    Ok(builder.finish(DynamicsKind::Lindblad, *grid))
}

/// Density-matrix samples from integrating `dρ/dt = L[ρ]`.
#[derive(Clone, Debug)]
pub struct StateTrajectory<T: Real> {
    pub grid: TimeGrid<T>,
    pub states: Vec<DensityState<T>>,
    /// `(sample index, smallest eigenvalue)` wherever positivity failed by more than tol.
    pub positivity_warnings: Vec<(usize, T)>,
    /// Largest `|tr ρ(t) − 1|` seen on the grid.
    pub max_trace_error: T,
}

/// RK4 integration of the Schrödinger-picture Lindblad equation.
pub fn evolve_lindblad_schrodinger<T: Real>(
    rho0: &DensityState<T>,
    gen: &GeneratorSpec<T>,
    grid: &TimeGrid<T>,
) -> Result<StateTrajectory<T>, DynamicsError> {
    evolve_lindblad_schrodinger_with(rho0, gen, grid, &EvolveOptions::default())
}

pub fn evolve_lindblad_schrodinger_with<T: Real>(
    rho0: &DensityState<T>,
    gen: &GeneratorSpec<T>,
    grid: &TimeGrid<T>,
    opts: &EvolveOptions<T>,
) -> Result<StateTrajectory<T>, DynamicsError> {
    let l = as_lindblad(gen)?;
    l.validate(opts.tol)?;
    if rho0.dim() != l.dim() {
        return Err(DynamicsError::DimMismatch(l.dim(), rho0.dim()));
    }
    let f = |x: &Matrix<T>, t: T| lindblad_generator(l, x, t);
    let h = grid.spacing();
    let mut states = Vec::with_capacity(grid.len());
    let mut warnings = Vec::new();
    let mut max_trace_error = T::zero();
    let mut x = rho0.matrix().clone();
    for k in 0..grid.len() {
        let state = DensityState::assume_valid(x.clone());
        max_trace_error = max_trace_error.max((x.trace() - Complex::new(T::one(), T::zero())).norm());
        let min = state.min_eigenvalue()?;
        if min < -opts.tol {
            warnings.push((k, min));
        }
        states.push(state);
        if k + 1 < grid.len() {
            x = rk4_step(&x, grid.time(k), h, &f)?;
            check_blowup(&x, grid.time(k) + h, opts.blowup)?;
        }
    }
    Ok(StateTrajectory {
        grid: *grid,
        states,
        positivity_warnings: warnings,
        max_trace_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Jump, Rate};
    use crate::linalg::hs_norm;
    use crate::scalar::c;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    type M = Matrix<f64>;

    fn dephasing(gamma: f64) -> GeneratorSpec<f64> {
        GeneratorSpec::Lindblad(Lindblad::qubit_dephasing(gamma))
    }

    fn plus() -> DensityState<f64> {
        DensityState::from_ket(&[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], 1e-12).unwrap()
    }

    #[test]
    fn adjoint_on_sigma_x_is_minus_gamma_sigma_x() {
        for gamma in [0.3, 1.0, 2.5] {
            let out = lindblad_adjoint(&dephasing(gamma), &M::pauli_x(), 0.0).unwrap();
            assert!(out.max_abs_diff(&M::pauli_x().scale_real(-gamma)) < 1e-14);
        }
    }

    #[test]
    fn adjoint_annihilates_identity() {
        let gen = GeneratorSpec::Lindblad(Lindblad::new(
            M::pauli_y(),
            vec![Jump::constant(M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap(), 0.7)],
            1.0,
        ));
        assert!(lindblad_adjoint(&gen, &M::identity(2), 0.3).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn adjoint_speed_on_decayed_observable() {
        let gamma: f64 = 1.0;
        for t in [0.0, 0.4, 1.2] {
            let o = M::pauli_x().scale_real((-gamma * t).exp());
            let speed = hs_norm(&lindblad_adjoint(&dephasing(gamma), &o, t).unwrap()).unwrap();
            assert!((speed - 2f64.sqrt() * gamma * (-gamma * t).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn negative_rate_rejected() {
        let gen = GeneratorSpec::Lindblad(Lindblad::new(M::zeros(2), vec![Jump::constant(M::pauli_z(), -1.0)], 1.0));
        assert!(matches!(
            lindblad_adjoint(&gen, &M::pauli_x(), 0.0),
            Err(DynamicsError::NegativeRate { index: 0, .. })
        ));
        let table = GeneratorSpec::Lindblad(Lindblad::new(
            M::zeros(2),
            vec![Jump::new(M::pauli_z(), Rate::Table(vec![(0.0, 1.0), (1.0, -0.1)]))],
            1.0,
        ));
        assert!(lindblad_adjoint(&table, &M::pauli_x(), 0.0).is_err());
    }

    #[test]
    fn wrong_kind_rejected() {
        let gen = GeneratorSpec::Unitary {
            hamiltonian: M::pauli_z(),
            hbar: 1.0,
        };
        assert!(matches!(
            lindblad_adjoint(&gen, &M::pauli_x(), 0.0),
            Err(DynamicsError::WrongKind { .. })
        ));
    }

    #[test]
    fn diagonal_state_stationary_under_dephasing() {
        let rho = DensityState::new(M::from_real_rows(&[&[0.7, 0.0], &[0.0, 0.3]]).unwrap(), 1e-12).unwrap();
        let grid = TimeGrid::span(2.0, 100).unwrap();
        let traj = evolve_lindblad_schrodinger(&rho, &dephasing(1.0), &grid).unwrap();
        for s in &traj.states {
            assert!(s.matrix().max_abs_diff(rho.matrix()) < 1e-15);
        }
    }

    #[test]
    fn off_diagonals_decay() {
        let grid = TimeGrid::span(FRAC_PI_2, 1000).unwrap();
        let traj = evolve_lindblad_schrodinger(&plus(), &dephasing(1.0), &grid).unwrap();
        for (t, s) in grid.times().zip(&traj.states) {
            assert!((s.matrix()[(0, 1)].re - 0.5 * (-t).exp()).abs() < 1e-8);
        }
        assert!(traj.max_trace_error < 1e-8);
        assert!(traj.positivity_warnings.is_empty());
    }

    #[test]
    fn piecewise_rate_interpolates() {
        let r = Rate::Table(vec![(0.0, 1.0), (2.0, 3.0)]);
        assert_eq!(r.at(-1.0), 1.0);
        assert_eq!(r.at(1.0), 2.0);
        assert_eq!(r.at(5.0), 3.0);
    }

    #[test]
    fn blowup_detected() {
        // Non-normal jump with an enormous rate: RK4 at this step size diverges.
        let gen = GeneratorSpec::Lindblad(Lindblad::new(M::zeros(2), vec![Jump::constant(M::pauli_z(), 1e4)], 1.0));
        let grid = TimeGrid::span(1.0, 10).unwrap();
        let err = evolve_lindblad_heisenberg(&M::pauli_x(), &gen, &plus(), &grid).unwrap_err();
        assert!(matches!(err, DynamicsError::Unstable { .. }));
    }
}
