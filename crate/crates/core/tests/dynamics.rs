mod common;

use std::f64::consts::FRAC_PI_2;

use common::*;
use num_complex::Complex64;
use oqsl::dynamics::{
    evolve_heisenberg, evolve_kraus_heisenberg, evolve_lindblad_heisenberg, evolve_lindblad_schrodinger,
    evolve_unitary_heisenberg, kraus_derivative, unitary_propagator, EvolveOptions, GeneratorSpec, Jump, KrausFamily,
    Lindblad, TimeGrid,
};
use oqsl::linalg::{hs_norm, trace_with, Matrix};
use oqsl::{ComplexMatrix, DensityState};
use proptest::prelude::*;

type M = ComplexMatrix;

fn plus() -> DensityState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DensityState::from_ket(&[Complex64::new(s, 0.0), Complex64::new(s, 0.0)], 1e-12).unwrap()
}

#[test]
fn dephasing_matches_closed_form() {
    let grid = TimeGrid::span(FRAC_PI_2, 1000).unwrap();
    let gen = GeneratorSpec::Lindblad(Lindblad::qubit_dephasing(1.0));
    let traj = evolve_lindblad_heisenberg(&M::pauli_x(), &gen, &plus(), &grid).unwrap();
    let mut worst = 0.0f64;
    for (t, o) in grid.times().zip(&traj.samples) {
        let exact = M::pauli_x().scale_real((-t).exp());
        worst = worst.max(hs_norm(&(o - &exact)).unwrap());
    }
    assert!(worst <= 1e-8, "max deviation {worst:e}");

    let kraus = GeneratorSpec::Kraus(KrausFamily::Dephasing { gamma: 1.0 });
    let ktraj = evolve_kraus_heisenberg(&M::pauli_x(), &kraus, &plus(), &grid).unwrap();
    for (a, b) in ktraj.samples.iter().zip(&traj.samples) {
        assert!(hs_norm(&(a - b)).unwrap() <= 1e-9);
    }
}

fn random_lindblad(seed: u64, dim: usize) -> GeneratorSpec<f64> {
    let mut r = rng(seed);
    let h = hermitian(&mut r, dim);
    let jumps = (0..2)
        .map(|k| Jump::constant(gaussian(&mut r, dim).scale_real(0.5), 0.3 + 0.2 * k as f64))
        .collect();
    GeneratorSpec::Lindblad(Lindblad::new(h, jumps, 1.0))
}

#[test]
fn rk4_is_fourth_order() {
    let gen = random_lindblad(17, 3);
    let mut r = rng(18);
    let o = hermitian(&mut r, 3);
    let rho = mixed_state(&mut r, 3);
    let final_at = |steps| {
        let grid = TimeGrid::span(1.0, steps).unwrap();
        evolve_lindblad_heisenberg(&o, &gen, &rho, &grid).unwrap().last().clone()
    };
    let reference = final_at(2560);
    let e1 = hs_norm(&(&final_at(20) - &reference)).unwrap();
    let e2 = hs_norm(&(&final_at(40) - &reference)).unwrap();
    let ratio = e1 / e2;
    assert!((12.0..20.0).contains(&ratio), "error ratio {ratio} ({e1:e} / {e2:e})");
}

#[test]
fn unitary_evolution_is_exact_conjugation() {
    let mut r = rng(4);
    for d in [2, 3, 5] {
        let h = hermitian(&mut r, d);
        let o = hermitian(&mut r, d);
        let rho = pure_state(&mut r, d);
        let grid = TimeGrid::span(1.3, 13).unwrap();
        let traj = evolve_unitary_heisenberg(&o, &h, &rho, &grid, 0.7).unwrap();
        for (t, sample) in grid.times().zip(&traj.samples) {
            let u = unitary_propagator(&h, t, 0.7).unwrap();
            let expected = &(&u.dagger() * &o) * &u;
            assert!(sample.max_abs_diff(&expected) < 1e-12);
        }
        // Spectrum and expectation bounds are preserved.
        assert!((traj.last().trace() - o.trace()).norm() < 1e-10);
    }
}

#[test]
fn lindblad_without_jumps_reduces_to_unitary() {
    let mut r = rng(8);
    let h = hermitian(&mut r, 3);
    let o = hermitian(&mut r, 3);
    let rho = mixed_state(&mut r, 3);
    let grid = TimeGrid::span(1.0, 400).unwrap();
    let open = GeneratorSpec::Lindblad(Lindblad::new(h.clone(), vec![], 1.0));
    let a = evolve_heisenberg(&o, &open, &rho, &grid, &EvolveOptions::default()).unwrap();
    let b = evolve_unitary_heisenberg(&o, &h, &rho, &grid, 1.0).unwrap();
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert!(x.max_abs_diff(y) < 1e-10);
    }
}

#[test]
fn kraus_derivative_converges_quadratically() {
    let gen = GeneratorSpec::Kraus(KrausFamily::Dephasing { gamma: 1.3 });
    let t: f64 = 0.4;
    // d/dt √((1 ± e^{−γt})/2) = ∓γ e^{−γt} / (4 √((1 ± e^{−γt})/2)).
    let e = (-1.3 * t).exp();
    let exact = [
        M::identity(2).scale_real(-1.3 * e / (4.0 * ((1.0 + e) / 2.0f64).sqrt())),
        M::pauli_z().scale_real(1.3 * e / (4.0 * ((1.0 - e) / 2.0f64).sqrt())),
    ];
    for (i, want) in exact.iter().enumerate() {
        let err = |h: f64| kraus_derivative(&gen, i, t, h).unwrap().max_abs_diff(want);
        let (e1, e2) = (err(2e-3), err(1e-3));
        assert!(e2 < 1e-6, "K{i}: {e2:e}");
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "K{i}: ratio {ratio}");
    }
}

#[test]
fn kraus_unitary_family_matches_unitary_evolution() {
    let mut r = rng(21);
    let h = hermitian(&mut r, 3);
    let o = hermitian(&mut r, 3);
    let rho = pure_state(&mut r, 3);
    let grid = TimeGrid::span(0.8, 200).unwrap();
    let kraus = GeneratorSpec::Kraus(KrausFamily::Unitary {
        hamiltonian: h.clone(),
        hbar: 1.0,
    });
    let a = evolve_kraus_heisenberg(&o, &kraus, &rho, &grid).unwrap();
    let b = evolve_unitary_heisenberg(&o, &h, &rho, &grid, 1.0).unwrap();
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert!(x.max_abs_diff(y) < 1e-12);
    }
    // Derivative-based speeds agree to finite-difference accuracy.
    for (x, y) in a.gen_speed_hs.iter().zip(&b.gen_speed_hs) {
        assert!((x - y).abs() < 1e-4 * (1.0 + y));
    }
}

fn duality_gap(gen: &GeneratorSpec<f64>, o: &M, rho: &DensityState, grid: &TimeGrid<f64>) -> f64 {
    let heis = evolve_heisenberg(o, gen, rho, grid, &EvolveOptions::default()).unwrap();
    let schr = evolve_lindblad_schrodinger(rho, gen, grid).unwrap();
    heis.samples
        .iter()
        .zip(&schr.states)
        .map(|(ot, rt)| (trace_with(o, rt).unwrap() - trace_with(ot, rho).unwrap()).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn prop_heisenberg_schrodinger_duality(seed in any::<u64>(), dim in 2usize..4, pure in any::<bool>()) {
        let gen = random_lindblad(seed, dim);
        let mut r = rng(seed ^ 0x5eed);
        let o = hermitian(&mut r, dim);
        let rho = if pure { pure_state(&mut r, dim) } else { mixed_state(&mut r, dim) };
        let grid = TimeGrid::span(1.0, 400).unwrap();
        let gap = duality_gap(&gen, &o, &rho, &grid);
        prop_assert!(gap <= 1e-6, "gap {gap:e}");
    }

    #[test]
    fn prop_adjoint_preserves_identity(seed in any::<u64>(), dim in 2usize..5) {
        // Unital Heisenberg dynamics: I(t) = I.
        let gen = random_lindblad(seed, dim);
        let rho = DensityState::maximally_mixed(dim);
        let grid = TimeGrid::span(0.5, 50).unwrap();
        let traj = evolve_heisenberg(&Matrix::identity(dim), &gen, &rho, &grid, &EvolveOptions::default()).unwrap();
        prop_assert!(traj.last().max_abs_diff(&Matrix::identity(dim)) < 1e-10);
        prop_assert!(traj.stddev.iter().all(|s| s.abs() < 1e-6));
    }

    #[test]
    fn prop_schrodinger_trace_preserved(seed in any::<u64>(), dim in 2usize..4) {
        let gen = random_lindblad(seed, dim);
        let rho = mixed_state(&mut rng(seed), dim);
        let grid = TimeGrid::span(1.0, 200).unwrap();
        let traj = evolve_lindblad_schrodinger(&rho, &gen, &grid).unwrap();
        prop_assert!(traj.max_trace_error < 1e-10);
        prop_assert!(traj.positivity_warnings.is_empty());
    }
}
