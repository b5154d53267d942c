//! Dense complex linear algebra: Schatten norms, exponentials, commutators and
//! expectation values on small square matrices.

mod eigh;
mod expm;
mod matrix;
mod state;
mod svd;

use num_complex::Complex;
use thiserror::Error;

pub use eigh::{eigh, eigvalsh, HermitianEigen};
pub use expm::{expm, solve};
pub use matrix::Matrix;
pub use state::DensityState;
pub use svd::singular_values;

use crate::scalar::Real;

/// Default validation tolerance for Hermiticity, unitarity and trace checks.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("expected {expected} entries, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("matrix exponential overflowed")]
    Overflow,
    #[error("singular linear system")]
    Singular,
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("operator is not Hermitian within tolerance {tol:e} (deviation {deviation:e})")]
    NotHermitian { tol: f64, deviation: f64 },
    #[error("variance {value:e} is negative beyond tolerance")]
    NegativeVariance { value: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
}

/// Largest singular value.
pub fn op_norm<T: Real>(m: &Matrix<T>) -> Result<T, LinalgError> {
    Ok(singular_values(m)?.first().copied().unwrap_or_else(T::zero))
}

/// `sqrt(tr(M†M))`.
pub fn hs_norm<T: Real>(m: &Matrix<T>) -> Result<T, LinalgError> {
    m.ensure_finite()?;
    Ok(m.entries().iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt())
}

/// Sum of singular values.
pub fn tr_norm<T: Real>(m: &Matrix<T>) -> Result<T, LinalgError> {
    Ok(singular_values(m)?.into_iter().fold(T::zero(), |s, x| s + x))
}

/// `[A, B] = AB − BA`.
pub fn commutator<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    a.check_dim(b)?;
    Ok(&(a * b) - &(b * a))
}

/// `{A, B} = AB + BA`.
pub fn anticommutator<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    a.check_dim(b)?;
    Ok(&(a * b) + &(b * a))
}

fn hermitian_deviation<T: Real>(m: &Matrix<T>) -> T {
    let n = m.dim();
    let mut dev = T::zero();
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn require_hermitian<T: Real>(m: &Matrix<T>, tol: T) -> Result<(), LinalgError> {
    m.ensure_finite()?;
    let dev = hermitian_deviation(m);
    if dev > tol {
        Err(LinalgError::NotHermitian {
            tol: tol.to_f64_lossy(),
            deviation: dev.to_f64_lossy(),
        })
    } else {
        Ok(())
    }
}

/// `tr(Oρ)` for an arbitrary (not necessarily Hermitian) operator.
pub fn trace_with<T: Real>(o: &Matrix<T>, rho: &DensityState<T>) -> Result<Complex<T>, LinalgError> {
    o.check_dim(rho.matrix())?;
    Ok(o.trace_product(rho.matrix()))
}

/// `Re tr(Oρ)` for Hermitian `O`, checked at tolerance `tol`.
pub fn expectation_tol<T: Real>(o: &Matrix<T>, rho: &DensityState<T>, tol: T) -> Result<T, LinalgError> {
    require_hermitian(o, tol)?;
    let z = trace_with(o, rho)?;
    Ok(z.re)
}

pub fn expectation<T: Real>(o: &Matrix<T>, rho: &DensityState<T>) -> Result<T, LinalgError> {
    expectation_tol(o, rho, T::lit(DEFAULT_TOL))
}

/// `⟨O²⟩ − ⟨O⟩²`; negatives in `[−tol, 0)` clamp to zero.
pub fn variance_tol<T: Real>(o: &Matrix<T>, rho: &DensityState<T>, tol: T) -> Result<T, LinalgError> {
    let mean = expectation_tol(o, rho, tol)?;
    let sq = (o * o).trace_product(rho.matrix()).re;
    let var = sq - mean * mean;
    if var >= T::zero() {
        Ok(var)
    } else if var >= -tol {
        Ok(T::zero())
    } else {
        Err(LinalgError::NegativeVariance { value: var.to_f64_lossy() })
    }
}

pub fn variance<T: Real>(o: &Matrix<T>, rho: &DensityState<T>) -> Result<T, LinalgError> {
    variance_tol(o, rho, T::lit(DEFAULT_TOL))
}

/// Standard deviation `ΔO = sqrt(variance)`.
pub fn std_dev<T: Real>(o: &Matrix<T>, rho: &DensityState<T>, tol: T) -> Result<T, LinalgError> {
    Ok(variance_tol(o, rho, tol)?.sqrt())
}
