//! Expectation values, operator actions on the grid, and the Madelung split.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::Result;
use crate::fourier::{derivative, Direction};
use crate::state::{KvnState, Representation};
use crate::transform::to_momentum;

/// Relative mask threshold below which the phase is left undefined.
pub const MADELUNG_MASK: f64 = 1e-12;

/// An expectation value together with the norm of the state it came from.
/// `value` is the raw quadrature `∫ A |psi|^2`; when the norm is off unity by
/// more than `1e-6` the `unnormalized` flag is raised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expectation {
    pub value: f64,
    pub norm: f64,
    pub unnormalized: bool,
}

impl Expectation {
    fn new(value: f64, norm: f64) -> Self {
        Self {
            value,
            norm,
            unnormalized: (norm - 1.0).abs() > 1e-6,
        }
    }
}

fn weighted_sum<F>(state: &KvnState, weight: F) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let g = state.grid();
    let mut acc = 0.0;
    for ((i, j), z) in state.amplitudes().indexed_iter() {
        acc += weight(g.q.point(i), g.dual.point(j)) * z.norm_sqr();
    }
    acc * g.cell()
}

/// `<q>`; position is multiplicative in both representations.
pub fn expectation_position(state: &KvnState) -> Expectation {
    Expectation::new(weighted_sum(state, |q, _| q), state.norm())
}

/// `<p>`: multiplicative in `(q, p)`, `-i hbar d/dQ` in `(q, Q)`.
pub fn expectation_momentum(state: &KvnState) -> Expectation {
    let value = match state.representation() {
        Representation::PositionMomentum => weighted_sum(state, |_, p| p),
        Representation::PositionDual => {
            let p_psi = apply_momentum(state);
            let g = state.grid();
            let s: Complex64 = state
                .amplitudes()
                .iter()
                .zip(p_psi.iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            s.re * g.cell()
        }
    };
    Expectation::new(value, state.norm())
}

/// Classical energy observable `<p^2 / 2m + V(q)>`, `potential` sampled on
/// the position axis.
pub fn expectation_hamiltonian(state: &KvnState, potential: &[f64]) -> Result<Expectation> {
    let g = state.grid();
    if potential.len() != g.q.n {
        return Err(crate::KvnError::GridMismatch(format!(
            "potential has {} samples, grid has {} positions",
            potential.len(),
            g.q.n
        )));
    }
    let s = match state.representation() {
        Representation::PositionMomentum => state.clone(),
        Representation::PositionDual => to_momentum(state)?,
    };
    let sg = s.grid();
    let m = sg.units.mass;
    let mut acc = 0.0;
    for ((i, j), z) in s.amplitudes().indexed_iter() {
        let p = sg.dual.point(j);
        acc += (p * p / (2.0 * m) + potential[i]) * z.norm_sqr();
    }
    Ok(Expectation::new(acc * sg.cell(), state.norm()))
}

/// `q psi`.
pub fn apply_position(state: &KvnState) -> Array2<Complex64> {
    let g = state.grid();
    Array2::from_shape_fn(g.shape(), |(i, j)| state.amplitudes()[[i, j]] * g.q.point(i))
}

/// `p psi`: multiplication in `(q, p)`, `-i hbar d/dQ` in `(q, Q)`.
pub fn apply_momentum(state: &KvnState) -> Array2<Complex64> {
    let g = state.grid();
    match state.representation() {
        Representation::PositionMomentum => {
            Array2::from_shape_fn(g.shape(), |(i, j)| state.amplitudes()[[i, j]] * g.dual.point(j))
        }
        Representation::PositionDual => {
            let d = derivative(state.amplitudes(), Direction::Dual, &g.dual.derivative_wavenumbers());
            d.mapv(|z| z * Complex64::new(0.0, -g.units.hbar))
        }
    }
}

/// `P psi = -i hbar d/dq psi`, the hidden partner conjugate to `q`.
pub fn apply_hidden_momentum(state: &KvnState) -> Array2<Complex64> {
    let g = state.grid();
    let d = derivative(state.amplitudes(), Direction::Position, &g.q.derivative_wavenumbers());
    d.mapv(|z| z * Complex64::new(0.0, -g.units.hbar))
}

/// Density and unit-modulus phase factor of `psi = sqrt(f) e^{i S / hbar}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MadelungFields {
    pub density: Array2<f64>,
    /// `psi / |psi|` where defined, zero elsewhere.
    pub phase_factor: Array2<Complex64>,
    pub defined: Array2<bool>,
}

impl MadelungFields {
    pub fn defined_count(&self) -> usize {
        self.defined.iter().filter(|&&d| d).count()
    }
}

/// Splits a `(q, p)` state into density and phase factor; the phase is masked
/// where `|psi|^2 <= MADELUNG_MASK * max |psi|^2`.
pub fn madelung_split(state: &KvnState) -> Result<MadelungFields> {
    state.require(Representation::PositionMomentum)?;
    let density = state.density();
    let max = density.iter().copied().fold(0.0, f64::max);
    let cut = MADELUNG_MASK * max;
    let defined = density.mapv(|d| d > cut && d > 0.0);
    let phase_factor = Array2::from_shape_fn(density.dim(), |(i, j)| {
        if defined[[i, j]] {
            let z = state.amplitudes()[[i, j]];
            z / z.norm()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(MadelungFields {
        density,
        phase_factor,
        defined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Axis, GridSpec, UnitSystem};
    use crate::state::{make_gaussian_state, GaussianSpec};
    use crate::transform::to_dual;
    use std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(
            Axis::new(-1.0, 2.0, 128).unwrap(),
            Axis::centered(128, 0.05).unwrap(),
            UnitSystem::default(),
        )
    }

    #[test]
    fn centred_gaussian_moments() {
        let g = grid();
        let s = make_gaussian_state(&g, Representation::PositionMomentum, &GaussianSpec::new(0.5, 1.0, 0.15, 0.3), true)
            .unwrap();
        let q = expectation_position(&s);
        let p = expectation_momentum(&s);
        assert!(!q.unnormalized);
        assert!((q.value - 0.5).abs() < g.dq());
        assert!((p.value - 1.0).abs() < g.d_dual());
    }

    #[test]
    fn momentum_agrees_across_representations() {
        let g = grid();
        let s = make_gaussian_state(&g, Representation::PositionMomentum, &GaussianSpec::new(0.3, 0.7, 0.2, 0.4), true)
            .unwrap()
            .rephased(|q, p| 0.3 * q * p);
        let pm = expectation_momentum(&s).value;
        let pd = expectation_momentum(&to_dual(&s).unwrap()).value;
        assert!((pm - pd).abs() < 1e-8, "{pm} vs {pd}");
    }

    #[test]
    fn free_gaussian_energy() {
        // sigma_p = 0.1 needs a finer momentum axis than the shared fixture
        let g = GridSpec::new(
            Axis::new(-1.0, 1.0, 64).unwrap(),
            Axis::centered(256, 0.02).unwrap(),
            UnitSystem::default(),
        );
        let s = make_gaussian_state(&g, Representation::PositionMomentum, &GaussianSpec::new(0.0, 1.0, 0.1, 0.1), true)
            .unwrap();
        let h = expectation_hamiltonian(&s, &vec![0.0; g.q.n]).unwrap();
        assert!((h.value - 0.505).abs() < 1e-3, "{}", h.value);
        let hd = expectation_hamiltonian(&to_dual(&s).unwrap(), &vec![0.0; g.q.n]).unwrap();
        assert!((hd.value - h.value).abs() < 1e-10);
    }

    #[test]
    fn unnormalized_state_is_flagged() {
        let g = grid();
        let s = make_gaussian_state(&g, Representation::PositionMomentum, &GaussianSpec::new(0.5, 0.0, 0.2, 0.3), true)
            .unwrap()
            .scaled(Complex64::new(2.0, 0.0));
        let e = expectation_position(&s);
        assert!(e.unnormalized);
        assert!((e.norm - 2.0).abs() < 1e-12);
    }

    #[test]
    fn madelung_of_real_state_has_unit_phase() {
        let g = grid();
        let s = make_gaussian_state(&g, Representation::PositionMomentum, &GaussianSpec::new(0.5, 0.0, 0.2, 0.3), true)
            .unwrap();
        let m = madelung_split(&s).unwrap();
        assert!(m.defined_count() > 0);
        for (z, d) in m.phase_factor.iter().zip(m.defined.iter()) {
            if *d {
                assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
        let rot = s.scaled(Complex64::cis(PI / 3.0));
        let mr = madelung_split(&rot).unwrap();
        let dd = (&mr.density - &m.density).iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!(dd < 1e-15);
        for ((a, b), d) in mr.phase_factor.iter().zip(m.phase_factor.iter()).zip(m.defined.iter()) {
            if *d {
                assert!((a - b * Complex64::cis(PI / 3.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn madelung_requires_momentum_representation() {
        let g = grid();
        assert!(madelung_split(&KvnState::zeros(g, Representation::PositionDual)).is_err());
    }
}
