mod common;

use common::*;
use oqsl::linalg::{eigh, eigvalsh, expm, hs_norm, op_norm, singular_values, tr_norm, Matrix};
use num_complex::Complex64;
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn check_norm_inequalities(a: &Matrix<f64>, b: &Matrix<f64>, u: &Matrix<f64>) {
    let d = a.dim() as f64;
    let (op, hs, tr) = (op_norm(a).unwrap(), hs_norm(a).unwrap(), tr_norm(a).unwrap());
    assert!(op <= hs + TOL && hs <= tr + TOL, "ordering {op} {hs} {tr}");
    assert!(hs <= d.sqrt() * op + TOL && tr <= d.sqrt() * hs + TOL);

    // Unitary invariance of all three norms.
    let rotated = &(u * a) * &u.dagger();
    assert!((op_norm(&rotated).unwrap() - op).abs() <= TOL * (1.0 + op));
    assert!((hs_norm(&rotated).unwrap() - hs).abs() <= TOL * (1.0 + hs));
    assert!((tr_norm(&rotated).unwrap() - tr).abs() <= TOL * (1.0 + tr));

    // Hölder with (∞, 1) and Cauchy–Schwarz.
    let ab = a * b;
    assert!(ab.trace().norm() <= op * tr_norm(b).unwrap() + TOL);
    assert!(a.dagger().trace_product(b).norm() <= hs * hs_norm(b).unwrap() + TOL);
    // Submultiplicativity and the mixed Hölder bound ‖AB‖_hs ≤ ‖A‖_op ‖B‖_hs.
    assert!(op_norm(&ab).unwrap() <= op * op_norm(b).unwrap() + TOL);
    assert!(hs_norm(&ab).unwrap() <= op * hs_norm(b).unwrap() + TOL);
    assert!(tr_norm(&ab).unwrap() <= op * tr_norm(b).unwrap() + TOL);
}

#[test]
fn norm_inequalities_on_200_random_matrices() {
    let mut r = rng(2024);
    for k in 0..200 {
        let d = 1 + k % 6;
        let a = gaussian(&mut r, d);
        let b = gaussian(&mut r, d);
        let u = unitary(&mut r, d);
        check_norm_inequalities(&a, &b, &u);
    }
}

#[test]
fn singular_values_match_gram_eigenvalues() {
    let mut r = rng(11);
    for k in 0..200 {
        let d = 1 + k % 8;
        let m = gaussian(&mut r, d);
        let sv = singular_values(&m).unwrap();
        let mut ev = eigvalsh(&(&m.dagger() * &m)).unwrap();
        ev.reverse();
        for (s, e) in sv.iter().zip(&ev) {
            assert!((s * s - e.max(0.0)).abs() <= 1e-9 * (1.0 + e.abs()), "{s}² vs {e}");
        }
    }
}

#[test]
fn singular_values_of_rank_deficient_matrices() {
    let mut r = rng(5);
    for d in 2..7 {
        let v = gaussian(&mut r, d);
        // Rank one: outer product of the first row with itself.
        let m = Matrix::outer(v.row(0), v.row(1)).unwrap();
        let sv = singular_values(&m).unwrap();
        let expected = hs_norm(&m).unwrap();
        assert!((sv[0] - expected).abs() < 1e-10);
        assert!(sv[1..].iter().all(|s| s.abs() < 1e-10));
    }
}

#[test]
fn expm_matches_spectral_oracle() {
    let mut r = rng(3);
    for k in 0..100 {
        let d = 1 + k % 6;
        let h = hermitian(&mut r, d);
        let t = 0.1 + (k as f64) * 0.07;
        let e = eigh(&h).unwrap();
        let oracle = e.apply(|l| Complex64::new(0.0, -l * t).exp());
        let direct = expm(&h.scale(Complex64::new(0.0, -t))).unwrap();
        assert!(direct.max_abs_diff(&oracle) < 1e-10, "d = {d}, t = {t}");
        assert!(direct.is_unitary(1e-10));
    }
}

#[test]
fn expm_inverse_and_large_norms() {
    let mut r = rng(9);
    for d in 1..6 {
        let a = gaussian(&mut r, d).scale_real(3.0);
        let prod = &expm(&a).unwrap() * &expm(&(-&a)).unwrap();
        assert!(prod.max_abs_diff(&Matrix::identity(d)) < 1e-8);
    }
    let h = Matrix::<f64>::pauli_x().scale_real(40.0);
    let u = expm(&h.scale(Complex64::new(0.0, -1.0))).unwrap();
    let expected = Matrix::identity(2).scale_real(40f64.cos()) - Matrix::pauli_x().scale(Complex64::new(0.0, 40f64.sin()));
    assert!(u.max_abs_diff(&expected) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn prop_norm_ordering_and_holder((a, b) in arb_pair(5), seed in any::<u64>()) {
        let u = unitary(&mut rng(seed), a.dim());
        check_norm_inequalities(&a, &b, &u);
    }

    #[test]
    fn prop_eigh_reconstructs(m in arb_matrix(6)) {
        let h = m.hermitian_part();
        let e = eigh(&h).unwrap();
        let back = e.apply(|l| Complex64::new(l, 0.0));
        prop_assert!(back.max_abs_diff(&h) < 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(e.vectors.is_unitary(1e-10));
    }

    #[test]
    fn prop_hs_norm_is_entrywise(m in arb_matrix(6)) {
        let direct = m.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((hs_norm(&m).unwrap() - direct).abs() < 1e-12 * (1.0 + direct));
    }
}
