use std::f64::consts::PI;

use kvn_core::boundary::qparity_check;
use kvn_core::evolution::{box_gaussian_state, evolve_box, BoxBackend};
use kvn_core::grid::{Axis, GridSpec, UnitSystem};
use kvn_core::observables::expectation_hamiltonian;
use kvn_core::spectral::*;
use kvn_core::state::{make_gaussian_state, GaussianSpec, KvnState, Representation};
use num_complex::Complex64;

fn box_grid() -> GridSpec {
    GridSpec::default_box(1.0, UnitSystem::default()).unwrap()
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal (d, e).
fn sturm_count(d: f64, e: f64, n: usize, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..n {
        let off = if i == 0 { 0.0 } else { e * e / q };
        q = d - x - off;
        if q == 0.0 {
            q = 1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// k-th (0-based) eigenvalue of the Dirichlet finite-difference Hamiltonian.
fn fd_level(k: usize, n: usize, length: f64, u: &UnitSystem) -> f64 {
    let h = length / (n + 1) as f64;
    let c = u.hbar * u.hbar / (2.0 * u.mass * h * h);
    let (d, e) = (2.0 * c, -c);
    let (mut lo, mut hi) = (0.0, 4.0 * c);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(d, e, n, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn quantum_levels_match_finite_differences() {
    let u = UnitSystem::new(1.1, 0.9).unwrap();
    let levels = quantum_box_levels(5, 1.3, &u).unwrap();
    for (k, lvl) in levels.iter().enumerate() {
        let coarse = fd_level(k, 1023, 1.3, &u);
        let fine = fd_level(k, 2047, 1.3, &u);
        // h is exactly halved; second-order error cancels
        let extrapolated = (4.0 * fine - coarse) / 3.0;
        let rel = (extrapolated - lvl.energy).abs() / lvl.energy;
        assert!(rel < 1e-6, "n = {}: {rel}", lvl.n);
    }
}

#[test]
fn band_modes_are_generator_eigenfunctions() {
    let g = box_grid();
    let (mode, s) = band_mode(1, 1.3, &g).unwrap();
    let (res, ray) = generator_residual(&s, Some(mode.energy)).unwrap();
    assert!(res <= 1e-8, "{res}");
    assert!((ray - 1.3 * PI).abs() < 1e-8);
    let (mode, s) = band_mode(2, 0.7, &g).unwrap();
    let (res, ray) = generator_residual(&s, None).unwrap();
    assert!(res <= 1e-8 && (ray - 2.0 * PI * 0.7).abs() < 1e-8);
    assert!((mode.energy - 1.4 * PI).abs() < 1e-14);
    for r in qparity_check(&s, 1.0).unwrap() {
        assert!(r.max_parity_asymmetry <= 1e-12);
    }
}

#[test]
fn spectrum_is_symmetric_about_zero() {
    let g = box_grid();
    for (n, kap) in [(1u32, 0.4), (3, 2.1), (5, 7.9)] {
        let (m_plus, plus) = band_mode(n, kap, &g).unwrap();
        let (m_minus, minus) = band_mode(n, -kap, &g).unwrap();
        assert_eq!(m_minus.energy, -m_plus.energy);
        assert!(generator_residual(&plus, Some(m_plus.energy)).unwrap().0 <= 1e-8);
        assert!(generator_residual(&minus, Some(m_minus.energy)).unwrap().0 <= 1e-8);
        for r in qparity_check(&minus, 1.0).unwrap() {
            assert!(r.max_parity_asymmetry <= 1e-12);
        }
    }
}

#[test]
fn standing_product_is_not_an_eigenfunction() {
    let g = box_grid();
    let s = KvnState::from_fn(g, Representation::PositionDual, |q, qd| {
        Complex64::new((PI * q).sin() * (1.3 * qd).cos(), 0.0)
    })
    .unwrap();
    let (res, _) = generator_residual(&s, None).unwrap();
    let (mode, _) = band_mode(1, 1.3, &g).unwrap();
    assert!(res / mode.energy.abs() > 0.1, "{res}");
}

#[test]
fn gaussian_and_constant_controls() {
    let g = box_grid();
    let gauss = make_gaussian_state(&g, Representation::PositionDual, &GaussianSpec::new(0.3, 0.0, 0.1, 2.0), true).unwrap();
    let (res, _) = generator_residual(&gauss, None).unwrap();
    assert!(res > 0.1, "{res}");
    let c = KvnState::from_fn(g, Representation::PositionDual, |_, _| Complex64::new(0.5, 0.0)).unwrap();
    assert_eq!(generator_residual(&c, None).unwrap(), (0.0, 0.0));
}

#[test]
fn band_mode_rejects_unrepresentable_kappa() {
    let g = box_grid();
    assert!(band_mode(1, 12.8, &g).is_err());
    assert!(band_mode(1, 0.123, &g).is_err());
    assert!(band_mode(0, 1.0, &g).is_err());
}

#[test]
fn gaps_shrink_with_kappa_spacing_but_quantum_gap_does_not() {
    let u = UnitSystem::default();
    let ks = |h: f64| -> Vec<f64> { (0..=(1.0 / h).round() as usize).map(|i| i as f64 * h).collect() };
    let g1 = max_adjacent_gap(&energy_sweep(2, &ks(0.1), 1.0, &u).unwrap());
    let g2 = max_adjacent_gap(&energy_sweep(2, &ks(0.05), 1.0, &u).unwrap());
    assert!((g2 / g1 - 0.5).abs() < 1e-12, "{}", g2 / g1);
    let q = quantum_box_levels(2, 1.0, &u).unwrap();
    assert!((q[1].energy - q[0].energy - 1.5 * PI * PI).abs() < 1e-13);
}

#[test]
fn classical_energy_is_conserved_in_the_box() {
    let g = GridSpec::new(Axis::new(-1.0, 1.0, 256).unwrap(), Axis::centered(256, 0.02).unwrap(), UnitSystem::default());
    let s = box_gaussian_state(&g, 1.0, &GaussianSpec::new(0.5, 1.0, 0.06, 0.15)).unwrap();
    let v = vec![0.0; g.q.n];
    let e0 = expectation_hamiltonian(&s, &v).unwrap().value;
    for t in [0.3, 0.75, 1.6] {
        let out = evolve_box(&s, t, 1.0, BoxBackend::Characteristics).unwrap();
        let e = expectation_hamiltonian(&out, &v).unwrap().value;
        assert!((e - e0).abs() < 1e-6, "t = {t}: {e} vs {e0}");
    }
}
