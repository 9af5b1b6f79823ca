use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qest::fisher::{qfi_matrix, sld_pair, weak_commutativity, SldSolver};
use qest::linalg::{eigh, gram_schmidt, hermiticity_error, max_abs, orthonormality_error, trace, CVec};
use qest::measurements::{classical_fisher, fourier_povm, tradeoff};
use qest::optimizer::{perturb, random_povm};
use qest::regime_large::{optimal_povm_large, sum_a, tradeoff_large_analytic};
use qest::regime_small::small_eigensystem;
use qest::states::{derivatives, evolve, hb_coefficients, taylor_small_delta, tridiagonal_approx};
use qest::ProbeState;

fn amplitudes(max_k: usize) -> impl Strategy<Value = Vec<Complex64>> {
    (1..=max_k).prop_flat_map(|k| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * k + 1)
            .prop_filter("nonzero norm", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
            .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
    })
}

fn probe(max_k: usize) -> impl Strategy<Value = ProbeState> {
    prop_oneof![
        (1..=max_k).prop_map(|k| ProbeState::hb(k).unwrap()),
        amplitudes(max_k).prop_map(|a| ProbeState::from_amplitudes(a).unwrap()),
    ]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolve_is_a_density_matrix(s in probe(12), phi in -3.2f64..3.2, delta in 0.0f64..2.5) {
        let rho = evolve(&s, phi, delta).unwrap();
        prop_assert!(hermiticity_error(&rho.entries) <= 1e-14);
        prop_assert!((trace(&rho.entries).re - 1.0).abs() <= 1e-12);
        let lmin = eigh(&rho.entries).values[0];
        prop_assert!(lmin >= -1e-12, "smallest eigenvalue {lmin}");
    }

    #[test]
    fn derivatives_match_finite_differences(s in probe(8), phi in -3.0f64..3.0, delta in 0.1f64..2.0) {
        let h = 1e-6;
        let (d1, d2) = derivatives(&s, phi, delta).unwrap();
        let fd1 = (evolve(&s, phi + h, delta).unwrap().entries - evolve(&s, phi - h, delta).unwrap().entries) / Complex64::new(2.0 * h, 0.0);
        let fd2 = (evolve(&s, phi, delta + h).unwrap().entries - evolve(&s, phi, delta - h).unwrap().entries) / Complex64::new(2.0 * h, 0.0);
        let scale = 1.0 + max_abs(&d1).max(max_abs(&d2));
        prop_assert!(max_abs(&(d1 - fd1)) <= 1e-6 * scale);
        prop_assert!(max_abs(&(d2 - fd2)) <= 1e-6 * scale);
    }

    #[test]
    fn tridiagonal_error_bounded_by_discarded_mass(s in probe(10), delta in 0.05f64..2.5) {
        let full = evolve(&s, 0.3, delta).unwrap();
        let tri = tridiagonal_approx(&s, 0.3, delta).unwrap();
        let k = s.offdiag_step();
        let sup = s.support();
        let a = s.amplitudes();
        let mut bound = 0.0;
        for (i, &n) in sup.iter().enumerate() {
            for &m in &sup[i + 1..] {
                if m - n != k {
                    let g = (m - n) as f64;
                    bound += 2.0 * a[n].norm() * a[m].norm() * (-0.5 * delta * delta * g * g).exp();
                }
            }
        }
        let diff = &full.entries - &tri.entries;
        let l1: f64 = diff.iter().map(|z| z.norm()).sum();
        prop_assert!(l1 <= bound * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn taylor_remainder_has_expected_order(k in 1usize..=8, phi in -1.0f64..1.0, d in 0.002f64..0.01) {
        for order in [2usize, 4] {
            let err = |d: f64| {
                let exact = evolve(&ProbeState::hb(k).unwrap(), phi, d).unwrap();
                max_abs(&(exact.entries - taylor_small_delta(k, phi, d, order).unwrap().entries))
            };
            let (e1, e2) = (err(d), err(d / 2.0));
            if e1 > 1e-13 {
                let slope = (e1 / e2).log2();
                prop_assert!(slope >= order as f64 + 1.5, "K={k} order={order} slope={slope}");
            }
        }
    }

    #[test]
    fn hb_coefficients_symmetric_and_normalised(k in 1usize..400) {
        let b = hb_coefficients(k);
        prop_assert_eq!(b.len(), k + 1);
        for i in 0..=k {
            prop_assert!((b[i] - b[k - i]).abs() <= 1e-14);
        }
        prop_assert!((b.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn qfi_diagonal_and_phase_independent(s in probe(10), phi in -3.0f64..3.0, delta in 0.05f64..2.0) {
        let h0 = qfi_matrix(&s, 0.0, delta, None).unwrap();
        let h = qfi_matrix(&s, phi, delta, None).unwrap();
        let scale = (h0.h11 * h0.h22).sqrt().max(1e-300);
        prop_assert!(h.h12.abs() <= 1e-8 * scale, "h12={} scale={scale}", h.h12);
        prop_assert!(rel(h.h11, h0.h11) <= 1e-8);
        prop_assert!(rel(h.h22, h0.h22) <= 1e-8);
    }

    #[test]
    fn phase_information_decreases_with_dephasing(k in 1usize..=12, d in 0.05f64..1.8) {
        let s = ProbeState::hb(k).unwrap();
        let a = qfi_matrix(&s, 0.0, d, None).unwrap();
        let b = qfi_matrix(&s, 0.0, d + 0.1, None).unwrap();
        prop_assert!(b.h11 <= a.h11 * (1.0 + 1e-10));
    }

    #[test]
    fn sld_residual_is_small(s in probe(10), phi in -3.0f64..3.0, delta in 0.1f64..2.0) {
        let rho = evolve(&s, phi, delta).unwrap().entries;
        let (d1, d2) = derivatives(&s, phi, delta).unwrap();
        let solver = SldSolver::new(&rho, None).unwrap();
        let eig = solver.eigen();
        let v = &eig.vectors;
        for d in [&d1, &d2] {
            let l = solver.solve(d).unwrap();
            let r = v.adjoint() * (&l * &rho + &rho * &l - d * Complex64::new(2.0, 0.0)) * v;
            let tol = 1e-8 * max_abs(d).max(1.0);
            for m in 0..r.nrows() {
                for n in 0..r.ncols() {
                    if eig.values[m] + eig.values[n] > solver.cutoff() {
                        prop_assert!(r[(m, n)].norm() <= tol, "residual {} at ({m},{n})", r[(m, n)].norm());
                    }
                }
            }
        }
    }

    #[test]
    fn weak_commutativity_for_hb(k in 1usize..=40, phi in -3.0f64..3.0, delta in 0.05f64..2.0) {
        let s = ProbeState::hb(k).unwrap();
        let rho = evolve(&s, phi, delta).unwrap();
        let (d1, d2) = derivatives(&s, phi, delta).unwrap();
        let slds = sld_pair(&rho.entries, &d1, &d2, None).unwrap();
        prop_assert!(weak_commutativity(&rho, &slds).unwrap() <= 1e-8);
    }

    #[test]
    fn sum_a_at_most_half(s in probe(30)) {
        let a = sum_a(&s);
        prop_assert!(a >= 0.0 && a <= 0.5 + 1e-15);
    }

    #[test]
    fn analytic_tradeoff_at_most_two(k in 1usize..3000) {
        let t = tradeoff_large_analytic(&ProbeState::hb(k).unwrap()).unwrap();
        prop_assert!(t > 0.0 && t <= 2.0 + 1e-12);
    }

    #[test]
    fn povms_are_complete(dim in 1usize..=24, seed in any::<u64>(), step in 0.0f64..3.0, offset in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_povm(dim, &mut rng);
        prop_assert!(p.completeness_error() <= 1e-10);
        prop_assert!(perturb(&p, step, &mut rng).completeness_error() <= 1e-10);
        prop_assert!(fourier_povm(dim, offset).completeness_error() <= 1e-10);
    }

    #[test]
    fn large_optimal_povm_complete(k in 1usize..=60) {
        let p = optimal_povm_large(&ProbeState::hb(k).unwrap()).unwrap();
        prop_assert!(p.completeness_error() <= 1e-10);
    }

    #[test]
    fn gram_schmidt_orthonormal(dim in 1usize..=20, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vs: Vec<CVec> = (0..dim)
            .map(|_| CVec::from_fn(dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
            .collect();
        let q = gram_schmidt(&vs).unwrap();
        prop_assert!(orthonormality_error(&q) <= 1e-10);
    }

    #[test]
    fn small_delta_reconstruction_order(k in 2usize..=7, phi in -1.0f64..1.0, d in 0.005f64..0.02) {
        for order in [2usize, 4] {
            if order == 4 && k < 4 {
                continue;
            }
            let err = |d: f64| {
                let sys = small_eigensystem(k, phi, d, order).unwrap();
                max_abs(&(sys.reconstruct() - taylor_small_delta(k, phi, d, order).unwrap().entries))
            };
            let (e1, e2) = (err(d), err(d / 2.0));
            if e1 > 1e-13 {
                let slope = (e1 / e2).log2();
                prop_assert!(slope >= order as f64 + 1.5, "K={k} order={order} slope={slope}");
            }
        }
    }
}

/// Classical information never exceeds quantum information, and the trade-off stays at most 2.
#[test]
fn classical_below_quantum_for_random_measurements() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cases = [(1usize, 0.3), (2, 0.35), (3, 0.05), (4, 1.0), (6, 0.6)];
    let mut checked = 0;
    for i in 0..500 {
        let (k, delta) = cases[i % cases.len()];
        let s = ProbeState::hb(k).unwrap();
        let h = qfi_matrix(&s, 0.0, delta, None).unwrap();
        let p = random_povm(s.dim(), &mut rng);
        let f = classical_fisher(&p, &s, 0.0, delta).unwrap();
        assert!(f.h11 <= h.h11 * (1.0 + 1e-9), "F11 {} > H11 {}", f.h11, h.h11);
        assert!(f.h22 <= h.h22 * (1.0 + 1e-9), "F22 {} > H22 {}", f.h22, h.h22);
        let diff = DMatrix::from_row_slice(2, 2, &[h.h11 - f.h11, h.h12 - f.h12, h.h12 - f.h12, h.h22 - f.h22]);
        let det = diff.determinant();
        assert!(det >= -1e-9 * h.h11 * h.h22, "H - F not PSD: det {det}");
        assert!(tradeoff(&f, &h).unwrap() <= 2.0 + 1e-9);
        checked += 1;
    }
    assert_eq!(checked, 500);
}
