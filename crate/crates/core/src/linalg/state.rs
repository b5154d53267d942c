use num_complex::Complex;
use num_traits::{One, Zero};

use super::{eigvalsh, require_hermitian, LinalgError, Matrix};
use crate::scalar::Real;

/// Validated density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState<T: Real> {
    matrix: Matrix<T>,
    purity: T,
}

impl<T: Real> DensityState<T> {
    pub fn new(matrix: Matrix<T>, tol: T) -> Result<Self, LinalgError> {
        require_hermitian(&matrix, tol).map_err(|e| LinalgError::InvalidState(e.to_string()))?;
        let tr = matrix.trace();
        if (tr - Complex::one()).norm() > tol {
            return Err(LinalgError::InvalidState(format!("trace {} differs from 1", tr.re)));
        }
        let min = eigvalsh(&matrix)?.first().copied().unwrap_or_else(T::zero);
        if min < -tol {
            return Err(LinalgError::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(Self::assume_valid(matrix))
    }

    /// Wraps an evolved matrix without the positivity check; used for
    /// integrator output where positivity loss is reported separately.
    pub(crate) fn assume_valid(matrix: Matrix<T>) -> Self {
        let purity = matrix.trace_product(&matrix).re;
        Self { matrix, purity }
    }

    /// `|ψ⟩⟨ψ|` for the normalized ket.
    pub fn from_ket(ket: &[Complex<T>], tol: T) -> Result<Self, LinalgError> {
        let norm = ket.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt();
        if ket.is_empty() || norm <= T::min_positive_value() || !norm.is_finite() {
            return Err(LinalgError::InvalidState("ket has zero or non-finite norm".into()));
        }
        let v: Vec<Complex<T>> = ket.iter().map(|&z| z / norm).collect();
        Self::new(Matrix::outer(&v, &v)?, tol)
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self, LinalgError> {
        if index >= dim {
            return Err(LinalgError::InvalidState(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut ket = vec![Complex::zero(); dim];
        ket[index] = Complex::one();
        Ok(Self::assume_valid(Matrix::outer(&ket, &ket)?))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::assume_valid(Matrix::identity(dim).scale_real(T::one() / T::usize(dim)))
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Cached `tr(ρ²)`.
    pub fn purity(&self) -> T {
        self.purity
    }

    pub fn is_pure(&self, tol: T) -> bool {
        (self.purity - T::one()).abs() <= tol
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<T, LinalgError> {
        Ok(eigvalsh(&self.matrix)?.first().copied().unwrap_or_else(T::zero))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn purity_cached_matches_recomputed() {
        let rho = DensityState::<f64>::from_ket(&[c(1.0, 0.0), c(0.0, 1.0)], 1e-12).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-15);
        let m = rho.matrix();
        assert!((rho.purity() - (m * m).trace().re).abs() < 1e-15);
        let mixed = DensityState::<f64>::maximally_mixed(4);
        assert!((mixed.purity() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_states() {
        let bad_trace = Matrix::<f64>::identity(2);
        assert!(DensityState::new(bad_trace, 1e-9).is_err());
        let negative = Matrix::<f64>::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]).unwrap();
        assert!(DensityState::new(negative, 1e-9).is_err());
        let non_herm = Matrix::<f64>::from_real_rows(&[&[0.5, 0.3], &[0.0, 0.5]]).unwrap();
        assert!(DensityState::new(non_herm, 1e-9).is_err());
        assert!(DensityState::<f64>::from_ket(&[c(0.0, 0.0)], 1e-9).is_err());
    }
}
