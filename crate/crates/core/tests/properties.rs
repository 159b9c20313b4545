use std::f64::consts::{PI, TAU};

use polariton::analysis::{
    classify_metrics, fourier_map, isoenergy_contour, ClassifierConfig, SpectrumContext, StateMetrics,
};
use polariton::bethe::{build_relative_wavefunction, relative_motion_residual, solve_bethe_coefficients};
use polariton::map::{self, seed_energy, OrbitConfig};
use polariton::model::{
    build_hamiltonian, inverse_hamiltonian_analytic, pair_energy_residual, single_polariton_dispersion,
};
use polariton::spectral::WavefunctionGrid;
use polariton::{ArrayParams, ComplexMatrix, PairBasis, C64};
use proptest::prelude::*;

fn phase() -> impl Strategy<Value = f64> {
    (0.01f64..(PI - 0.01)).prop_filter("sin φ away from zero", |p| p.sin().abs() > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pair_basis_is_a_bijection(n in 2usize..90) {
        let b = PairBasis::new(n).unwrap();
        prop_assert_eq!(b.size(), n * (n - 1) / 2);
        for i in 0..b.size() {
            let (x, y) = b.pair(i);
            prop_assert!(x < y);
            prop_assert_eq!(b.index(x, y), Some(i));
            prop_assert_eq!(b.index(y, x), Some(i));
        }
        for x in 0..n {
            prop_assert_eq!(b.index(x, x), None);
        }
    }

    #[test]
    fn analytic_inverse_is_exact(n in 2usize..40, phi in phase()) {
        let p = ArrayParams::unit(n, phi).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        prop_assert_eq!(h.max_abs_diff(&h.transpose()), 0.0);
        let inv = inverse_hamiltonian_analytic(&p).unwrap();
        let err = h.matmul(&inv).max_abs_diff(&ComplexMatrix::identity(n));
        prop_assert!(err < 1e-8, "N={} φ={}: {:e}", n, phi, err);
    }

    #[test]
    fn dispersion_is_even_and_periodic(k in 0.0f64..PI, phi in phase(), turns in -3i32..3) {
        let p = ArrayParams::unit(4, phi).unwrap();
        prop_assume!((k.cos() - phi.cos()).abs() > 1e-6);
        let w = single_polariton_dispersion(k, &p).unwrap();
        let shifted = single_polariton_dispersion(-k + TAU * turns as f64, &p).unwrap();
        prop_assert!((w - shifted).abs() <= 1e-9 * w.abs().max(1.0));
    }

    #[test]
    fn grids_are_symmetric_with_empty_diagonal(n in 2usize..25, seed in any::<u64>()) {
        let b = PairBasis::new(n).unwrap();
        let amps: Vec<C64> = (0..b.size())
            .map(|i| {
                let t = (seed.wrapping_add(i as u64) % 1000) as f64;
                C64::new((t * 0.37).sin(), (t * 0.11).cos())
            })
            .collect();
        let g = WavefunctionGrid::from_pair_amplitudes(&b, &amps);
        for x in 0..n {
            prop_assert_eq!(g.values[(x, x)], C64::new(0.0, 0.0));
            for y in 0..n {
                prop_assert_eq!(g.values[(x, y)], g.values[(y, x)]);
            }
        }
        let f = fourier_map(&g, 2 * n).unwrap();
        prop_assert!(f.asymmetry() < 1e-10);
        prop_assert!(f.magnitudes.iter().all(|m| m.is_finite() && *m >= 0.0));
    }

    #[test]
    fn contour_points_are_on_shell_and_symmetric(k1 in 0.3f64..3.0, k2 in 0.3f64..3.0) {
        let phi = 0.04;
        let p = ArrayParams::unit(60, phi).unwrap();
        prop_assume!((k1 - phi).abs() > 0.05 && (k2 - phi).abs() > 0.05);
        let eps2 = seed_energy(k1, k2, &p).unwrap();
        let c = isoenergy_contour(eps2, &p, 256).unwrap();
        prop_assert!(!c.is_empty());
        for &(a, b) in &c.points {
            prop_assert!(pair_energy_residual(C64::new(a, 0.0), C64::new(b, 0.0), eps2, phi, 1.0) < 1e-10);
        }
        prop_assert_eq!(c.points.len() % 8, 0);
    }

    #[test]
    fn orbit_states_are_canonical(k1 in 0.3f64..3.0, d in 0.1f64..1.0) {
        let p = ArrayParams::unit(60, 0.02).unwrap();
        let cfg = OrbitConfig { max_iterations: 8, ..OrbitConfig::default() };
        let o = map::orbit((k1, k1 + d), &p, &cfg).unwrap();
        prop_assert!(o.count() >= 1);
        for s in &o.states {
            for k in [s.k1.re, s.k2.re] {
                prop_assert!((0.0..TAU).contains(&k));
            }
        }
        for (i, a) in o.states.iter().enumerate() {
            for b in &o.states[..i] {
                let gap = |x: f64, y: f64| {
                    let d = (x - y).rem_euclid(TAU);
                    d.min(TAU - d)
                };
                prop_assert!(gap(a.k1.re, b.k1.re) >= cfg.tolerance || gap(a.k2.re, b.k2.re) >= cfg.tolerance);
            }
        }
    }

    #[test]
    fn sweeps_have_one_count_per_seed(lo in 0.4f64..1.5, span in 0.1f64..1.0, samples in 1usize..12) {
        let p = ArrayParams::unit(60, 0.02).unwrap();
        let cfg = OrbitConfig { max_iterations: 6, ..OrbitConfig::default() };
        let r = map::sweep((lo, lo + span), samples, 0.4, &p, &cfg).unwrap();
        prop_assert_eq!(r.k1_samples().len(), samples);
        prop_assert_eq!(r.counts().len(), samples);
        prop_assert!(r.counts().iter().all(|&c| c >= 1));
    }

    #[test]
    fn bethe_solution_is_linear_and_mirror_invariant(
        k1 in 0.4f64..3.0,
        k2 in 0.4f64..3.0,
        are in -1.0f64..1.0,
        bim in -1.0f64..1.0,
    ) {
        prop_assume!((k1 - k2).abs() > 0.05);
        let p = ArrayParams::unit(10, 0.3).unwrap();
        let eps2 = seed_energy(k1, k2, &p).unwrap();
        let center = (k1 + k2) / 2.0;
        let free = (C64::new(are, 0.5), C64::new(0.2, bim));
        let one = solve_bethe_coefficients(center, eps2, &p, free).unwrap();
        let res = relative_motion_residual(&build_relative_wavefunction(&one, 60)).unwrap();
        prop_assert!(res.max() < 1e-8, "{:?}", res);
        let scaled = solve_bethe_coefficients(center, eps2, &p, (free.0 * 3.0, free.1 * 3.0)).unwrap();
        prop_assert!((scaled.a_tilde - one.a_tilde * 3.0).norm() <= 1e-10 * one.a_tilde.norm().max(1.0));
        prop_assert!((scaled.b_tilde - one.b_tilde * 3.0).norm() <= 1e-10 * one.b_tilde.norm().max(1.0));
        let mirrored = solve_bethe_coefficients(-center, eps2, &p, free).unwrap();
        let res_m = relative_motion_residual(&build_relative_wavefunction(&mirrored, 60)).unwrap();
        prop_assert!(res_m.max() < 1e-8, "{:?}", res_m);
    }

    #[test]
    fn classification_is_a_pure_function(
        mipr in 1.0f64..500.0,
        ripr in 1.0f64..500.0,
        weight in 0.0f64..1.0,
        overlap in 0.0f64..1.0,
        cells in 1usize..4000,
    ) {
        let m = StateMetrics {
            momentum_ipr: mipr,
            real_space_ipr: ripr,
            band_weight: weight,
            band_cells: cells,
            overlap,
            overlap_k1: 2.0,
            overlap_k2: 1.0,
            peaks: 8,
        };
        let ctx = SpectrumContext { real_ipr_median: 100.0, momentum_ipr_p75: 150.0 };
        let cfg = ClassifierConfig::default();
        prop_assert_eq!(classify_metrics(&m, &ctx, &cfg), classify_metrics(&m.clone(), &ctx, &cfg));
    }
}
