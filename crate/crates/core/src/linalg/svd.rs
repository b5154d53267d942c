//! Singular values by one-sided (Hestenes) Jacobi orthogonalization.

use num_complex::Complex;
use num_traits::Zero;

use super::{LinalgError, Matrix};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 80;

/// Singular values of `m` in descending order.
pub fn singular_values<T: Real>(m: &Matrix<T>) -> Result<Vec<T>, LinalgError> {
    m.ensure_finite()?;
    let n = m.dim();
    // Work on columns; cols[j] is column j of m.
    let mut cols: Vec<Vec<Complex<T>>> = (0..n).map(|j| (0..n).map(|i| m[(i, j)]).collect()).collect();
    // Rounding in the column inner products is about n·ε·√(αβ); a stricter
    // threshold can stall on nearly orthogonal columns.
    let tol = T::epsilon() * T::usize(2 * n);

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n.saturating_sub(1) {
            for j in i + 1..n {
                let (alpha, beta, gamma) = {
                    let (ci, cj) = (&cols[i], &cols[j]);
                    let mut a = T::zero();
                    let mut b = T::zero();
                    let mut g: Complex<T> = Complex::zero();
                    for k in 0..n {
                        a += ci[k].norm_sqr();
                        b += cj[k].norm_sqr();
                        g += ci[k].conj() * cj[k];
                    }
                    (a, b, g)
                };
                let g = gamma.norm();
                if g <= tol * (alpha * beta).sqrt() || g <= T::min_positive_value() {
                    continue;
                }
                rotated = true;
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (g + g);
                let t = if zeta >= T::zero() {
                    T::one() / (zeta + (T::one() + zeta * zeta).sqrt())
                } else {
                    -T::one() / (-zeta + (T::one() + zeta * zeta).sqrt())
                };
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = cs * t;
                let (left, right) = cols.split_at_mut(j);
                let ci = &mut left[i];
                let cj = &mut right[0];
                for k in 0..n {
                    let a: Complex<T> = ci[k];
                    let b: Complex<T> = cj[k] * phase;
                    ci[k] = a * cs - b * sn;
                    cj[k] = a * sn + b * cs;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence("one-sided Jacobi SVD"));
    }
    let mut sv: Vec<T> = cols
        .iter()
        .map(|col| col.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(sv)
}
