//! Cyclic Jacobi diagonalization of Hermitian matrices.

use num_complex::Complex;
use num_traits::Zero;

use super::{LinalgError, Matrix};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `A = V diag(λ) V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: Matrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// Rebuilds `V f(Λ) V†` for a scalar function of the eigenvalues.
    pub fn apply(&self, f: impl Fn(T) -> Complex<T>) -> Matrix<T> {
        let n = self.values.len();
        let v = &self.vectors;
        let fl: Vec<Complex<T>> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex::zero();
                for k in 0..n {
                    acc += v[(i, k)] * fl[k] * v[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

fn off_diagonal_norm2<T: Real>(a: &Matrix<T>) -> T {
    let n = a.dim();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

/// Full eigen-decomposition of a Hermitian matrix. Only the Hermitian part of
/// `a` is used; callers validate Hermiticity beforehand where it matters.
pub fn eigh<T: Real>(a: &Matrix<T>) -> Result<HermitianEigen<T>, LinalgError> {
    a.ensure_finite()?;
    let n = a.dim();
    let mut m = a.hermitian_part();
    let mut v = Matrix::<T>::identity(n);
    let total: T = m.entries().iter().fold(T::zero(), |s, z| s + z.norm_sqr());
    let threshold = T::epsilon() * T::epsilon() * total.max(T::min_positive_value());

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm2(&m) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm2(&m) > threshold {
        return Err(LinalgError::NoConvergence("Hermitian Jacobi"));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = Matrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, col)] = v[(r, src)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh<T: Real>(a: &Matrix<T>) -> Result<Vec<T>, LinalgError> {
    Ok(eigh(a)?.values)
}

/// Annihilates `m[(p, q)]` with a phase fix on column `q` followed by a real
/// Givens rotation in the `(p, q)` plane.
fn rotate<T: Real>(m: &mut Matrix<T>, v: &mut Matrix<T>, p: usize, q: usize) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r <= T::min_positive_value() {
        return;
    }
    let n = m.dim();
    // D = diag(1, .., e^{-iφ} at q, ..) makes the (p, q) entry real and positive.
    let phase = apq.conj() / r;
    for k in 0..n {
        m[(k, q)] *= phase;
    }
    let phase_c = phase.conj();
    for k in 0..n {
        m[(q, k)] *= phase_c;
    }
    for k in 0..n {
        v[(k, q)] *= phase;
    }

    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let tau = (aqq - app) / (r + r);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let cs = T::one() / (T::one() + t * t).sqrt();
    let sn = t * cs;

    // A ← Jᵀ A J with J_pp = J_qq = c, J_pq = s, J_qp = −s.
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * cs - akq * sn;
        m[(k, q)] = akp * sn + akq * cs;
    }
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = apk * cs - aqk * sn;
        m[(q, k)] = apk * sn + aqk * cs;
    }
    m[(p, q)] = Complex::zero();
    m[(q, p)] = Complex::zero();
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * cs - vkq * sn;
        v[(k, q)] = vkp * sn + vkq * cs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn pauli_spectra() {
        for p in [Matrix::<f64>::pauli_x(), Matrix::pauli_y(), Matrix::pauli_z()] {
            let e = eigh(&p).unwrap();
            assert!((e.values[0] + 1.0).abs() < 1e-14);
            assert!((e.values[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn reconstructs_complex_hermitian() {
        let a = Matrix::<f64>::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, -1.0), c(0.0, 0.5)],
            vec![c(1.0, 1.0), c(-1.0, 0.0), c(0.3, 0.2)],
            vec![c(0.0, -0.5), c(0.3, -0.2), c(0.5, 0.0)],
        ])
        .unwrap();
        let e = eigh(&a).unwrap();
        let back = e.apply(|l| c(l, 0.0));
        assert!(back.max_abs_diff(&a) < 1e-12);
        assert!(e.vectors.is_unitary(1e-12));
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
