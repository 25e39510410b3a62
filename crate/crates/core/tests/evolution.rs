use std::f64::consts::PI;

use kvn_core::evolution::*;
use kvn_core::grid::{Axis, GridSpec, UnitSystem};
use kvn_core::observables::{expectation_momentum, expectation_position};
use kvn_core::state::{make_gaussian_state, GaussianSpec, KvnState, Representation};
use kvn_core::transform::{to_dual, to_momentum};
use kvn_core::KvnError;
use num_complex::Complex64;

const QP: Representation = Representation::PositionMomentum;

fn free_grid(units: UnitSystem) -> GridSpec {
    GridSpec::new(Axis::new(-4.0, 4.0, 128).unwrap(), Axis::centered(128, 0.0625).unwrap(), units)
}

fn peak(s: &KvnState) -> (f64, f64) {
    let d = s.density();
    let (mut best, mut at) = (f64::MIN, (0, 0));
    for ((i, j), v) in d.indexed_iter() {
        if *v > best {
            best = *v;
            at = (i, j);
        }
    }
    (s.grid().q.point(at.0), s.grid().dual.point(at.1))
}

fn max_density_error<F: Fn(f64, f64) -> f64>(s: &KvnState, oracle: F) -> f64 {
    let g = s.grid();
    s.density()
        .indexed_iter()
        .map(|((i, j), v)| (v - oracle(g.q.point(i), g.dual.point(j))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn free_identity_and_ballistic_peak() {
    let g = free_grid(UnitSystem::default());
    let s = make_gaussian_state(&g, QP, &GaussianSpec::new(0.25, 1.0, 0.2, 0.25), true).unwrap();
    assert_eq!(evolve_free_spectral(&s, 0.0).unwrap().max_abs_diff(&s).unwrap(), 0.0);
    let out = evolve_free_spectral(&s, 0.25).unwrap();
    let (q, p) = peak(&out);
    assert!((q - 0.5).abs() < 1e-12 && (p - 1.0).abs() < 1e-12, "peak at ({q}, {p})");
    assert!((out.time() - 0.25).abs() < 1e-15);
}

#[test]
fn free_shear_matches_resampled_density() {
    let units = UnitSystem::new(0.8, 1.6).unwrap();
    let g = free_grid(units);
    let spec = GaussianSpec::new(-0.5, 1.2, 0.3, 0.4);
    let s = make_gaussian_state(&g, QP, &spec, false).unwrap();
    let t = 0.9;
    let out = evolve_free_spectral(&s, t).unwrap();
    let err = max_density_error(&out, |q, p| spec.density(q - p * t / units.mass, p));
    assert!(err < 1e-6, "{err}");
    assert!((out.norm() - s.norm()).abs() < 1e-10);
}

#[test]
fn free_dual_route_agrees_and_composes() {
    let g = free_grid(UnitSystem::new(1.3, 0.7).unwrap());
    let s = make_gaussian_state(&g, QP, &GaussianSpec::new(0.0, -0.3, 0.25, 0.35), true).unwrap();
    let via_qp = evolve_free_spectral(&s, 0.6).unwrap();
    let via_dual = to_momentum(&evolve_free_spectral(&to_dual(&s).unwrap(), 0.6).unwrap()).unwrap();
    assert!(via_qp.max_abs_diff(&via_dual).unwrap() < 1e-9);
    let two = evolve_free_spectral(&evolve_free_spectral(&s, 0.25).unwrap(), 0.35).unwrap();
    assert!(two.max_abs_diff(&via_qp).unwrap() < 1e-9);
    let back = evolve_free_spectral(&via_qp, -0.6).unwrap();
    assert!(back.max_abs_diff(&s).unwrap() < 1e-9);
}

#[test]
fn free_wraparound_is_an_error() {
    let g = free_grid(UnitSystem::default());
    let s = make_gaussian_state(&g, QP, &GaussianSpec::new(2.0, 2.0, 0.2, 0.25), true).unwrap();
    assert!(matches!(evolve_free_spectral(&s, 1.5), Err(KvnError::WrapAround(_))));
}

/// Direct quadrature of the free kernel against a `(q, Q)` state, restricted
/// to source rows whose implied momentum `m (q - q') / t` lies in the band.
fn kernel_quadrature(s: &KvnState, t: f64) -> KvnState {
    let g = *s.grid();
    let a = s.amplitudes();
    let w = g.cell();
    let p_band = PI * g.units.hbar / g.d_dual();
    let out = ndarray::Array2::from_shape_fn(g.shape(), |(i, k)| {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((i2, k2), z) in a.indexed_iter() {
            if (g.units.mass * (g.q.point(i) - g.q.point(i2)) / t).abs() >= p_band {
                continue;
            }
            acc += kernel_free(&g.units, t, g.q.point(i), g.dual.point(k), g.q.point(i2), g.dual.point(k2)).unwrap() * z;
        }
        acc * w
    });
    s.with_amplitudes(out, s.time() + t).unwrap()
}

#[test]
fn free_kernel_quadrature_matches_spectral() {
    let g = GridSpec::new(Axis::new(-4.0, 4.0, 100).unwrap(), Axis::centered(64, 0.1).unwrap(), UnitSystem::default());
    let s = make_gaussian_state(&g, QP, &GaussianSpec::new(-0.3, 0.3, 0.4, 0.32), true).unwrap();
    let d = to_dual(&s).unwrap();
    let spectral = evolve_free_spectral(&d, 1.0).unwrap();
    let quad = kernel_quadrature(&d, 1.0);
    let err = spectral.max_abs_diff(&quad).unwrap();
    assert!(err < 1e-6, "{err}");
}

fn box_setup() -> (GridSpec, KvnState) {
    let g = GridSpec::new(Axis::new(-1.0, 1.0, 256).unwrap(), Axis::centered(256, 0.02).unwrap(), UnitSystem::default());
    let s = box_gaussian_state(&g, 1.0, &GaussianSpec::new(0.5, 1.0, 0.06, 0.15)).unwrap();
    (g, s)
}

/// Peak restricted to the physical half `q in [0, L]`.
fn box_peak(s: &KvnState) -> (f64, f64) {
    let g = s.grid();
    let d = s.density();
    let (mut best, mut at) = (f64::MIN, (0.0, 0.0));
    for ((i, j), v) in d.indexed_iter() {
        let q = g.q.point(i);
        if q >= 0.0 && *v > best {
            best = *v;
            at = (q, g.dual.point(j));
        }
    }
    at
}

#[test]
fn billiard_peaks_and_period() {
    let (_, s) = box_setup();
    let a = evolve_box(&s, 0.25, 1.0, BoxBackend::Characteristics).unwrap();
    let (q, p) = box_peak(&a);
    assert!((q - 0.75).abs() < 1e-9 && (p - 1.0).abs() < 0.02, "({q}, {p})");
    let b = evolve_box(&s, 0.75, 1.0, BoxBackend::Characteristics).unwrap();
    let (q, p) = box_peak(&b);
    assert!((q - 0.75).abs() < 1e-9 && (p + 1.0).abs() < 0.02, "({q}, {p})");
    // each momentum row returns after its own period 2L / |p|
    let g = *s.grid();
    let mut c = s.clone();
    for p in [1.0, 0.8, 1.26] {
        let j = g.dual.nearest_index(p).unwrap();
        let back = evolve_box(&s, 2.0 / g.dual.point(j), 1.0, BoxBackend::Characteristics).unwrap();
        let err = (0..g.q.n)
            .map(|i| (back.density()[[i, j]] - s.density()[[i, j]]).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "p = {p}: {err}");
        c = back;
    }
    for out in [&a, &b, &c] {
        assert!((out.norm() - s.norm()).abs() < 1e-8);
    }
}

#[test]
fn billiard_composes() {
    let (_, s) = box_setup();
    let once = evolve_box(&s, 0.9, 1.0, BoxBackend::Characteristics).unwrap();
    let twice = evolve_box(&evolve_box(&s, 0.4, 1.0, BoxBackend::Characteristics).unwrap(), 0.5, 1.0, BoxBackend::Characteristics).unwrap();
    assert!(once.max_abs_diff(&twice).unwrap() < 1e-9);
}

#[test]
fn billiard_rejects_bad_states() {
    let (g, s) = box_setup();
    let lopsided = make_gaussian_state(&g, QP, &GaussianSpec::new(0.5, 1.0, 0.06, 0.15), true).unwrap();
    assert!(evolve_box(&lopsided, 0.3, 1.0, BoxBackend::Characteristics).is_err());
    assert!(box_gaussian_state(&g, 1.0, &GaussianSpec::new(0.1, 1.0, 0.06, 0.15)).is_err());
    assert!(matches!(evolve_box(&s, 0.3, 0.9, BoxBackend::Characteristics), Err(KvnError::NotWallAligned(_))));
}

#[test]
fn single_image_shell_matches_free_flight_away_from_walls() {
    let g = GridSpec::new(Axis::new(-1.0, 1.0, 512).unwrap(), Axis::centered(256, 0.02).unwrap(), UnitSystem::default());
    let s = box_gaussian_state(&g, 1.0, &GaussianSpec::new(0.5, 0.0, 0.05, 0.06)).unwrap();
    let t = 0.25;
    let policy = ImageSumPolicy { n_images: 1, tail_tol: 1e-8 };
    let d = to_dual(&s).unwrap();
    let img = propagate_image_kernel(&d, t, 1.0, &policy).unwrap();
    let free = evolve_free_spectral(&d, t).unwrap();
    let err = img.state.max_abs_diff(&free).unwrap() / free.max_amplitude();
    assert!(err < 1e-10, "{err}");
    assert!(img.tail_estimate < 1e-8);
}

#[test]
fn image_kernel_agrees_with_characteristics_through_a_bounce() {
    let (_, s) = box_setup();
    let t = 0.75;
    let a = evolve_box(&s, t, 1.0, BoxBackend::Characteristics).unwrap();
    let b = evolve_box(&s, t, 1.0, BoxBackend::ImageKernel(ImageSumPolicy::default())).unwrap();
    let err = a.max_abs_diff(&b).unwrap();
    assert!(err < 1e-5, "{err}");
    assert!((b.norm() - s.norm()).abs() < 1e-8);
}

#[test]
fn too_few_images_is_reported() {
    let (_, s) = box_setup();
    let policy = ImageSumPolicy { n_images: 1, tail_tol: 1e-8 };
    let r = evolve_box(&s, 0.75, 1.0, BoxBackend::ImageKernel(policy));
    assert!(matches!(r, Err(KvnError::ImageTruncation { .. })), "{r:?}");
}

#[test]
fn gravity_without_field_is_free_flight() {
    let g = free_grid(UnitSystem::default());
    let s = make_gaussian_state(&g, QP, &GaussianSpec::new(0.2, 0.5, 0.25, 0.3), true).unwrap();
    let a = evolve_gravity(&s, 0.7, 0.0).unwrap();
    let b = evolve_free_spectral(&s, 0.7).unwrap();
    assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
}

#[test]
fn gravity_moments_follow_the_classical_fall() {
    let g = free_grid(UnitSystem::default());
    let s = make_gaussian_state(&g, QP, &GaussianSpec::new(0.5, 0.0, 0.2, 0.25), true).unwrap();
    let out = evolve_gravity(&s, 0.4, 1.0).unwrap();
    let q = expectation_position(&out).value;
    let p = expectation_momentum(&out).value;
    assert!((q - 0.42).abs() < 1e-3, "{q}");
    assert!((p + 0.4).abs() < 1e-3, "{p}");
}

#[test]
fn gravity_dual_phase_matches_characteristics() {
    let units = UnitSystem::new(0.7, 1.9).unwrap();
    let g = free_grid(units);
    let spec = GaussianSpec::new(0.3, 0.4, 0.25, 0.3);
    let s = make_gaussian_state(&g, QP, &spec, false).unwrap();
    let (t, acc) = (0.6, 1.0);
    let out = evolve_gravity(&s, t, acc).unwrap();
    let m = units.mass;
    let gg = *out.grid();
    let err = out
        .amplitudes()
        .indexed_iter()
        .map(|((i, j), z)| {
            let (q, p) = (gg.q.point(i), gg.dual.point(j));
            (z - Complex64::new(spec.amplitude(q - p * t / m - 0.5 * acc * t * t, p + m * acc * t), 0.0)).norm()
        })
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "{err}");
    let dual = evolve_gravity(&to_dual(&s).unwrap(), t, acc).unwrap();
    assert!(to_momentum(&dual).unwrap().max_abs_diff(&out).unwrap() < 1e-8);
}

#[test]
fn gravity_zero_dual_slice_is_shifted_free_flight() {
    let g = free_grid(UnitSystem::default());
    let s = to_dual(&make_gaussian_state(&g, QP, &GaussianSpec::new(0.3, 0.4, 0.25, 0.35), true).unwrap()).unwrap();
    let (t, acc) = (0.5, 2.0);
    let grav = evolve_gravity(&s, t, acc).unwrap();
    // shift q by g t^2 / 2 = 0.25 = 4 grid cells
    let free = evolve_free_spectral(&s, t).unwrap();
    let j0 = g.dual.n / 2;
    let cells = (0.5 * acc * t * t / g.dq()).round() as usize;
    for i in 0..g.q.n - cells {
        let d = (grav.amplitudes()[[i, j0]] - free.amplitudes()[[i + cells, j0]]).norm();
        assert!(d < 1e-12, "row {i}: {d}");
    }
}

#[test]
fn splitstep_free_equals_spectral() {
    let g = free_grid(UnitSystem::default());
    let s = to_dual(&make_gaussian_state(&g, QP, &GaussianSpec::new(0.0, 0.6, 0.25, 0.3), true).unwrap()).unwrap();
    let a = evolve_splitstep(&s, &PotentialSpec::free(), 0.01, 50).unwrap();
    let b = evolve_free_spectral(&s, 0.5).unwrap();
    assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
}

fn harmonic_error(n_steps: usize) -> (f64, f64) {
    let g = GridSpec::new(Axis::new(-5.0, 5.0, 128).unwrap(), Axis::centered(128, 10.0 / 128.0).unwrap(), UnitSystem::default());
    let spec = GaussianSpec::new(1.0, 0.0, 0.3, 0.4);
    let s = to_dual(&make_gaussian_state(&g, QP, &spec, false).unwrap()).unwrap();
    let t = 0.5 * PI;
    let out = evolve_splitstep(&s, &PotentialSpec::harmonic(1.0, 1.0), t / n_steps as f64, n_steps).unwrap();
    let drift = (out.norm() - s.norm()).abs();
    let out = to_momentum(&out).unwrap();
    // rotation by a quarter period: rho(q, p, t) = rho0(-p, q)
    (max_density_error(&out, |q, p| spec.density(-p, q)), drift)
}

#[test]
fn splitstep_harmonic_quarter_period() {
    let (err, drift) = harmonic_error(1571);
    assert!(err < 1e-4, "{err}");
    assert!(drift < 1e-10 * 1571.0);
}

#[test]
fn splitstep_is_second_order() {
    let (e1, _) = harmonic_error(20);
    let (e2, _) = harmonic_error(40);
    let ratio = e1 / e2;
    assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio} ({e1}, {e2})");
}

#[test]
fn splitstep_rejects_unresolved_kick_and_bad_step() {
    let g = free_grid(UnitSystem::default());
    let s = to_dual(&make_gaussian_state(&g, QP, &GaussianSpec::new(0.0, 0.0, 0.25, 0.3), true).unwrap()).unwrap();
    assert!(matches!(evolve_splitstep(&s, &PotentialSpec::quartic(1.0), 1.0, 1), Err(KvnError::Nyquist(_))));
    assert!(evolve_splitstep(&s, &PotentialSpec::free(), 0.0, 3).is_err());
    let qp = to_momentum(&s).unwrap();
    assert!(evolve_splitstep(&qp, &PotentialSpec::free(), 0.1, 3).is_err());
}
