//! Matrix exponential via scaling and squaring with diagonal Padé approximants
//! (degrees 3, 5, 7, 9, 13), following Higham's 2005 parameter selection.

use num_complex::Complex;
use num_traits::Zero;

use super::{LinalgError, Matrix};
use crate::scalar::Real;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Double precision: (degree, θ_m).
#[allow(clippy::excessive_precision)]
const THETA_F64: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
    (13, 5.371920351148152),
];

/// Single precision: (degree, θ_m).
#[allow(clippy::excessive_precision)]
const THETA_F32: [(usize, f64); 3] = [(3, 4.258730016922831e-1), (5, 1.880152677804762), (7, 3.925724783138660)];

const MAX_SQUARINGS: i32 = 1000;

fn norm1<T: Real>(a: &Matrix<T>) -> T {
    let n = a.dim();
    (0..n)
        .map(|j| (0..n).fold(T::zero(), |s, i| s + a[(i, j)].norm()))
        .fold(T::zero(), T::max)
}

/// `e^A` for a finite square matrix.
pub fn expm<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    a.ensure_finite()?;
    let n = a.dim();
    let nrm = norm1(a);
    if nrm.is_zero() {
        return Ok(Matrix::identity(n));
    }
    let table: &[(usize, f64)] = if T::epsilon().to_f64_lossy() > 1e-10 {
        &THETA_F32
    } else {
        &THETA_F64
    };
    let (last_deg, last_theta) = *table.last().unwrap();
    for &(deg, theta) in &table[..table.len() - 1] {
        if nrm <= T::lit(theta) {
            return finish(pade(a, deg)?);
        }
    }
    let ratio = nrm / T::lit(last_theta);
    let s = if ratio <= T::one() {
        0
    } else {
        ratio.log2().ceil().to_i32().unwrap_or(i32::MAX)
    };
    if s > MAX_SQUARINGS {
        return Err(LinalgError::Overflow);
    }
    let scaled = a.scale_real(T::lit(2f64.powi(-s)));
    let mut x = pade(&scaled, last_deg)?;
    for _ in 0..s {
        x = &x * &x;
        if !x.is_finite() {
            return Err(LinalgError::Overflow);
        }
    }
    finish(x)
}

fn finish<T: Real>(x: Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(LinalgError::Overflow)
    }
}

fn coeffs(deg: usize) -> &'static [f64] {
    match deg {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        9 => &B9,
        13 => &B13,
        _ => unreachable!("unsupported Padé degree {deg}"),
    }
}

fn pade<T: Real>(a: &Matrix<T>, deg: usize) -> Result<Matrix<T>, LinalgError> {
    let n = a.dim();
    let b: Vec<T> = coeffs(deg).iter().map(|&x| T::lit(x)).collect();
    let id = Matrix::<T>::identity(n);
    let a2 = a * a;
    let (u, v) = if deg == 13 {
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let inner_u = &(&a6.scale_real(b[13]) + &a4.scale_real(b[11])) + &a2.scale_real(b[9]);
        let mut u = &a6 * &inner_u;
        u += &a6.scale_real(b[7]);
        u += &a4.scale_real(b[5]);
        u += &a2.scale_real(b[3]);
        u += &id.scale_real(b[1]);
        let u = a * &u;
        let inner_v = &(&a6.scale_real(b[12]) + &a4.scale_real(b[10])) + &a2.scale_real(b[8]);
        let mut v = &a6 * &inner_v;
        v += &a6.scale_real(b[6]);
        v += &a4.scale_real(b[4]);
        v += &a2.scale_real(b[2]);
        v += &id.scale_real(b[0]);
        (u, v)
    } else {
        // Even powers A^0, A^2, ..., A^{deg-1}.
        let mut powers = vec![id.clone()];
        for k in 1..=deg / 2 {
            let next = &powers[k - 1] * &a2;
            powers.push(next);
        }
        let mut u = Matrix::zeros(n);
        let mut v = Matrix::zeros(n);
        for (k, p) in powers.iter().enumerate() {
            u += &p.scale_real(b[2 * k + 1]);
            v += &p.scale_real(b[2 * k]);
        }
        (a * &u, v)
    };
    let p = &v + &u;
    let q = &v - &u;
    solve(&q, &p)
}

/// Solves `A X = B` by LU decomposition with partial pivoting.
pub fn solve<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    a.check_dim(b)?;
    let n = a.dim();
    let mut lu: Vec<Complex<T>> = a.entries().to_vec();
    let mut x: Vec<Complex<T>> = b.entries().to_vec();
    for col in 0..n {
        let (piv, pmag) = (col..n)
            .map(|r| (r, lu[r * n + col].norm()))
            .fold((col, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmag <= T::min_positive_value() {
            return Err(LinalgError::Singular);
        }
        if piv != col {
            for k in 0..n {
                lu.swap(col * n + k, piv * n + k);
                x.swap(col * n + k, piv * n + k);
            }
        }
        let d = lu[col * n + col];
        for r in col + 1..n {
            let f = lu[r * n + col] / d;
            if f.is_zero() {
                continue;
            }
            for k in col..n {
                let v = lu[col * n + k];
                lu[r * n + k] -= f * v;
            }
            for k in 0..n {
                let v = x[col * n + k];
                x[r * n + k] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let d = lu[col * n + col];
        for k in 0..n {
            let mut acc = x[col * n + k];
            for j in col + 1..n {
                acc -= lu[col * n + j] * x[j * n + k];
            }
            x[col * n + k] = acc / d;
        }
    }
    Matrix::from_row_major(n, x)
}
