#![allow(dead_code)]

use num_complex::Complex64;
use oqsl::linalg::{expm, Matrix};
use oqsl::{ComplexMatrix, DensityState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let entries = (0..dim * dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    Matrix::from_row_major(dim, entries).unwrap()
}

pub fn hermitian<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    gaussian(rng, dim).hermitian_part()
}

pub fn unitary<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    expm(&hermitian(rng, dim).scale(Complex64::new(0.0, 1.0))).unwrap()
}

pub fn pure_state<R: Rng>(rng: &mut R, dim: usize) -> DensityState {
    let g = gaussian(rng, dim);
    let norm = g.row(0).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let ket: Vec<Complex64> = g.row(0).iter().map(|z| z / norm).collect();
    DensityState::from_ket(&ket, 1e-10).unwrap()
}

pub fn mixed_state<R: Rng>(rng: &mut R, dim: usize) -> DensityState {
    let g = gaussian(rng, dim);
    let w = &g * &g.dagger();
    let tr = w.trace().re;
    DensityState::new(w.scale_real(1.0 / tr).hermitian_part(), 1e-10).unwrap()
}

/// Square complex matrices of dimension 1 to `max_dim` with entries in [-2, 2].
pub fn arb_matrix(max_dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max_dim).prop_flat_map(|d| {
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), d * d).prop_map(move |v| {
            Matrix::from_row_major(d, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
        })
    })
}

/// Pairs of same-dimension matrices.
pub fn arb_pair(max_dim: usize) -> impl Strategy<Value = (ComplexMatrix, ComplexMatrix)> {
    (1..=max_dim).prop_flat_map(|d| {
        let m = move || {
            proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), d * d).prop_map(move |v| {
                Matrix::from_row_major(d, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
            })
        };
        (m(), m())
    })
}
