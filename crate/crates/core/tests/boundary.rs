use kvn_core::boundary::*;
use kvn_core::evolution::{box_gaussian_state, evolve_box, evolve_free_spectral, BoxBackend};
use kvn_core::grid::{Axis, GridSpec, UnitSystem};
use kvn_core::spectral::{apply_generator, band_mode};
use kvn_core::state::{make_gaussian_state, GaussianSpec, KvnState, Representation};
use kvn_core::transform::to_dual;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn box_grid() -> GridSpec {
    GridSpec::default_box(1.0, UnitSystem::default()).unwrap()
}

fn free_evolver(s: &KvnState, t: f64) -> kvn_core::Result<KvnState> {
    evolve_free_spectral(s, t)
}

/// Random member of the compliant family: complex combination of band modes
/// plus a Q-symmetrised Gaussian sitting near a wall.
fn compliant(rng: &mut ChaCha8Rng, g: &GridSpec) -> KvnState {
    let mut s = KvnState::zeros(*g, Representation::PositionDual);
    for _ in 0..3 {
        let n = rng.random_range(1..=5u32);
        let kappa = rng.random_range(-80i32..=80) as f64 * 0.1;
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        s = s.plus(&band_mode(n, kappa, g).unwrap().1.scaled(c)).unwrap();
    }
    let q0 = if rng.random_bool(0.5) { 0.05 } else { 0.95 };
    let spec = GaussianSpec::new(q0, rng.random_range(-2.0..2.0), 0.08, 2.0);
    let gauss = dual_symmetrize(&make_gaussian_state(g, Representation::PositionDual, &spec, true).unwrap()).unwrap();
    let w = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    s.plus(&gauss.scaled(w)).unwrap()
}

#[test]
fn stationary_band_mode_has_no_continuity_residual() {
    let (_, s) = band_mode(2, 1.5, &box_grid()).unwrap();
    let r = continuity_residual(&s, 1e-3, &free_evolver).unwrap();
    assert!(r <= 1e-8, "{r}");
}

#[test]
fn free_gaussian_continuity_residual() {
    let g = GridSpec::new(Axis::new(-4.0, 4.0, 128).unwrap(), Axis::centered(128, 0.0625).unwrap(), UnitSystem::default());
    let s = to_dual(&make_gaussian_state(&g, Representation::PositionMomentum, &GaussianSpec::new(0.2, 1.0, 0.3, 0.4), true).unwrap()).unwrap();
    let r = continuity_residual(&s, 1e-4, &free_evolver).unwrap();
    assert!(r <= 1e-5, "{r}");
    assert_eq!(continuity_residual(&KvnState::zeros(g, Representation::PositionDual), 1e-4, &free_evolver).unwrap(), 0.0);
}

#[test]
fn coarse_probe_is_flagged() {
    let g = GridSpec::new(Axis::new(-4.0, 4.0, 128).unwrap(), Axis::centered(128, 0.0625).unwrap(), UnitSystem::default());
    let s = to_dual(&make_gaussian_state(&g, Representation::PositionMomentum, &GaussianSpec::new(0.0, 1.0, 0.3, 0.4), true).unwrap()).unwrap();
    assert!(matches!(continuity_residual(&s, 0.5, &free_evolver), Err(kvn_core::KvnError::ProbeTooCoarse { .. })));
}

#[test]
fn compliant_pairs_have_vanishing_boundary_form_and_symmetric_generator() {
    let g = box_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let a = compliant(&mut rng, &g);
        let b = compliant(&mut rng, &g);
        let bf = boundary_form(&a, &b, 1.0).unwrap();
        assert!(bf.norm() <= 1e-10 * a.norm() * b.norm(), "{bf}");
        let la = a.with_amplitudes(apply_generator(&a).unwrap(), 0.0).unwrap();
        let lb = b.with_amplitudes(apply_generator(&b).unwrap(), 0.0).unwrap();
        let lhs = a.inner(&lb).unwrap();
        let rhs = la.inner(&b).unwrap();
        let scale = la.norm() * b.norm() + a.norm() * lb.norm();
        assert!((lhs - rhs).norm() <= 1e-8 * scale, "{lhs} vs {rhs}");
    }
}

#[test]
fn odd_wall_component_breaks_the_boundary_form() {
    let g = box_grid();
    let (_, even) = band_mode(1, 0.5, &g).unwrap();
    let odd_at_wall = |sign: f64| {
        KvnState::from_fn(g, Representation::PositionDual, |q, qd| {
            let bump = (-(q * q) / 0.02).exp();
            Complex64::new((0.5 * qd).cos() + sign * 0.3 * bump * (0.5 * qd).sin() * (-(qd * qd) / 50.0).exp(), 0.0)
        })
        .unwrap()
    };
    let mixed = even.plus(&odd_at_wall(1.0)).unwrap();
    let flipped = even.plus(&odd_at_wall(-1.0)).unwrap();
    let a = boundary_form(&even, &mixed, 1.0).unwrap();
    let b = boundary_form(&even, &flipped, 1.0).unwrap();
    assert!(a.norm() > 1e-3, "{a}");
    assert!((a + b).norm() < 1e-10 * a.norm(), "{a} {b}");
}

#[test]
fn billiard_keeps_walls_closed() {
    let g = GridSpec::new(Axis::new(-1.0, 1.0, 256).unwrap(), Axis::centered(256, 0.02).unwrap(), UnitSystem::default());
    let s = box_gaussian_state(&g, 1.0, &GaussianSpec::new(0.5, 1.0, 0.06, 0.15)).unwrap();
    for t in [0.25, 0.5, 0.75, 1.3] {
        let out = to_dual(&evolve_box(&s, t, 1.0, BoxBackend::Characteristics).unwrap()).unwrap();
        for r in qparity_check(&out, 1.0).unwrap() {
            assert!(r.max_parity_asymmetry <= 1e-8, "t = {t}: {r:?}");
            assert!(r.relative_wall_current <= 1e-8, "t = {t}: {r:?}");
            assert!(r.net_wall_flux.abs() <= 1e-10);
        }
    }
}

#[test]
fn complex_wall_row_carries_odd_current_with_zero_net_flux() {
    let g = box_grid();
    let (_, a) = band_mode(1, 0.5, &g).unwrap();
    let (_, b) = band_mode(2, 1.0, &g).unwrap();
    let s = a.plus(&b.scaled(Complex64::new(0.0, 1.0))).unwrap();
    let r = qparity_check(&s, 1.0).unwrap();
    assert!(r[0].max_parity_asymmetry <= 1e-12);
    assert!(r[0].relative_wall_current > 1e-3);
    assert!(r[0].net_wall_flux.abs() <= 1e-10);
}
