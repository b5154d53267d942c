use super::{DynamicsError, DynamicsKind, EvolveOptions, TimeGrid};
use crate::linalg::{expectation_tol, op_norm, std_dev, DensityState, Matrix};
use crate::scalar::Real;

/// Sampled Heisenberg evolution of one observable.
#[derive(Clone, Debug)]
pub struct ObservableTrajectory<T: Real> {
    pub kind: DynamicsKind,
    pub grid: TimeGrid<T>,
    /// `O(t_k)`.
    pub samples: Vec<Matrix<T>>,
    /// `⟨O(t_k)⟩` in the reference state.
    pub expect: Vec<T>,
    /// `ΔO(t_k)`.
    pub stddev: Vec<T>,
    /// `‖dO/dt‖_hs` at each sample.
    pub gen_speed_hs: Vec<T>,
    /// `‖dO/dt‖_op` at each sample.
    pub gen_speed_op: Vec<T>,
    /// `ΔO` at cell midpoints `(t_k + t_{k+1})/2`, when the dynamics allows
    /// exact evaluation there.
    pub midpoint_stddev: Option<Vec<T>>,
    /// `Σ_i ‖K_i†(t) O(0) K̇_i(t)‖_hs` for Kraus trajectories.
    pub kraus_speed_hs: Option<Vec<T>>,
}

impl<T: Real> ObservableTrajectory<T> {
    pub fn initial(&self) -> &Matrix<T> {
        &self.samples[0]
    }

    pub fn last(&self) -> &Matrix<T> {
        &self.samples[self.samples.len() - 1]
    }

    pub fn expect_initial(&self) -> T {
        self.expect[0]
    }

    pub fn expect_final(&self) -> T {
        self.expect[self.expect.len() - 1]
    }

    /// Elapsed time covered by the trajectory.
    pub fn duration(&self) -> T {
        self.grid.duration()
    }
}

/// Accumulates samples while a trajectory is being built.
pub(crate) struct TrajectoryBuilder<'a, T: Real> {
    rho: &'a DensityState<T>,
    tol: T,
    samples: Vec<Matrix<T>>,
    expect: Vec<T>,
    stddev: Vec<T>,
    speed_hs: Vec<T>,
    speed_op: Vec<T>,
}

impl<'a, T: Real> TrajectoryBuilder<'a, T> {
    pub fn new(rho: &'a DensityState<T>, opts: &EvolveOptions<T>, capacity: usize) -> Self {
        Self {
            rho,
            tol: opts.tol,
            samples: Vec::with_capacity(capacity),
            expect: Vec::with_capacity(capacity),
            stddev: Vec::with_capacity(capacity),
            speed_hs: Vec::with_capacity(capacity),
            speed_op: Vec::with_capacity(capacity),
        }
    }

    /// Records `O(t)` together with its time derivative.
    pub fn push(&mut self, o: Matrix<T>, rate: &Matrix<T>) -> Result<(), DynamicsError> {
        self.expect.push(expectation_tol(&o, self.rho, self.tol).map_err(|_| DynamicsError::NonHermitianObservable)?);
        self.stddev.push(std_dev(&o, self.rho, self.tol)?);
        self.speed_hs.push(super::generator::speed_hs(rate)?);
        self.speed_op.push(op_norm(rate)?);
        self.samples.push(o);
        Ok(())
    }

    pub fn finish(self, kind: DynamicsKind, grid: TimeGrid<T>) -> ObservableTrajectory<T> {
        ObservableTrajectory {
            kind,
            grid,
            samples: self.samples,
            expect: self.expect,
            stddev: self.stddev,
            gen_speed_hs: self.speed_hs,
            gen_speed_op: self.speed_op,
            midpoint_stddev: None,
            kraus_speed_hs: None,
        }
    }
}
