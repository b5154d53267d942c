//! Heisenberg-picture observable trajectories and Schrödinger-picture state
//! trajectories under unitary, Lindblad and Kraus dynamics.

mod generator;
mod grid;
mod kraus;
mod lindblad;
mod trajectory;
mod unitary;

use thiserror::Error;

pub use generator::{DynamicsKind, GeneratorSpec, Jump, KrausFamily, Lindblad, Rate};
pub use grid::TimeGrid;
pub use kraus::{evolve_kraus_heisenberg, kraus_derivative};
pub use lindblad::{
    evolve_lindblad_heisenberg, evolve_lindblad_schrodinger, lindblad_adjoint, lindblad_generator, StateTrajectory,
};
pub use trajectory::ObservableTrajectory;
pub use unitary::{evolve_unitary_heisenberg, unitary_propagator};

pub(crate) use lindblad::lindblad_adjoint_unchecked;
pub(crate) use unitary::unitary_propagator_unchecked;

use crate::linalg::{DensityState, LinalgError, Matrix, DEFAULT_TOL};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("Hamiltonian is not Hermitian")]
    NonHermitianHamiltonian,
    #[error("observable is not Hermitian")]
    NonHermitianObservable,
    #[error("hbar must be positive and finite, got {0}")]
    InvalidHbar(f64),
    #[error("jump {index}: negative rate {value} at t = {time}")]
    NegativeRate { index: usize, time: f64, value: f64 },
    #[error("jump {index}: {reason}")]
    InvalidRate { index: usize, reason: String },
    #[error("invalid Kraus family: {0}")]
    InvalidKraus(String),
    #[error("Kraus completeness violated at t = {time} (deviation {deviation:e})")]
    KrausIncomplete { time: f64, deviation: f64 },
    #[error("time {0} outside the Kraus family domain")]
    OutsideDomain(f64),
    #[error("Kraus index {index} out of range ({count} operators)")]
    KrausIndex { index: usize, count: usize },
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("integration unstable at t = {time} (entry magnitude {magnitude:e}); use a smaller step")]
    Unstable { time: f64, magnitude: f64 },
    #[error("expected {expected} dynamics, got {found:?}")]
    WrongKind { expected: &'static str, found: DynamicsKind },
}

/// Numerical settings shared by the evolution routines.
#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions<T: Real> {
    /// Validation tolerance for Hermiticity, completeness and trace checks.
    pub tol: T,
    /// Entry magnitude above which an integration step counts as unstable.
    pub blowup: T,
}

impl<T: Real> Default for EvolveOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(DEFAULT_TOL),
            blowup: T::lit(1e12),
        }
    }
}

pub(crate) fn check_observable<T: Real>(o: &Matrix<T>, rho: &DensityState<T>, dim: usize, tol: T) -> Result<(), DynamicsError> {
    if o.dim() != dim {
        return Err(DynamicsError::DimMismatch(dim, o.dim()));
    }
    if rho.dim() != dim {
        return Err(DynamicsError::DimMismatch(dim, rho.dim()));
    }
    if !o.is_hermitian(tol) {
        return Err(DynamicsError::NonHermitianObservable);
    }
    Ok(())
}

/// Evolves `o0` under whichever dynamics `gen` describes.
pub fn evolve_heisenberg<T: Real>(
    o0: &Matrix<T>,
    gen: &GeneratorSpec<T>,
    rho: &DensityState<T>,
    grid: &TimeGrid<T>,
    opts: &EvolveOptions<T>,
) -> Result<ObservableTrajectory<T>, DynamicsError> {
    match gen {
        GeneratorSpec::Unitary { hamiltonian, hbar } => {
            unitary::evolve_unitary_heisenberg_with(o0, hamiltonian, *hbar, rho, grid, opts)
        }
        GeneratorSpec::Lindblad(_) => lindblad::evolve_lindblad_heisenberg_with(o0, gen, rho, grid, opts),
        GeneratorSpec::Kraus(_) => kraus::evolve_kraus_heisenberg_with(o0, gen, rho, grid, opts),
    }
}
