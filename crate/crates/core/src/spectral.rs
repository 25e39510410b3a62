//! Liouvillian spectrum of the free particle in a box, the matching quantum
//! levels, and the numerical evidence that the classical spectrum is continuous.
//!
//! The eigenfunctions are the travelling combinations `cos(k_n q + kappa Q)`.
//! Standing products such as `sin(k_n q) cos(kappa Q)` are not eigenfunctions
//! of the mixed-derivative generator.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::boundary::wall_rows;
use crate::error::{KvnError, Result};
use crate::fourier::{derivative, Direction};
use crate::grid::{GridSpec, UnitSystem};
use crate::state::{KvnState, Representation};

/// A Liouvillian eigenmode label with its eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandMode {
    pub n: u32,
    pub kappa: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumLevel {
    pub n: u32,
    pub energy: f64,
}

/// `(hbar^2 / m) k kappa`.
pub fn dispersion(k: f64, kappa: f64, units: &UnitSystem) -> f64 {
    units.hbar * units.hbar / units.mass * k * kappa
}

/// `(hbar^2 / m) (n pi / L) kappa`.
pub fn band_energy(n: u32, kappa: f64, length: f64, units: &UnitSystem) -> Result<f64> {
    if n < 1 {
        return Err(KvnError::InvalidParameter("band index n must be at least 1".into()));
    }
    if !(length > 0.0) {
        return Err(KvnError::InvalidParameter(format!("box length must be positive, got {length}")));
    }
    Ok(dispersion(n as f64 * PI / length, kappa, units))
}

fn on_lattice(x: f64, spacing: f64) -> bool {
    let r = x / spacing;
    (r - r.round()).abs() <= 1e-9 * r.abs().max(1.0)
}

/// `cos(n pi q / L + kappa Q)` on a wall-aligned doubled grid (`L = q.max`),
/// unit-normalised on the grid.
///
/// `kappa` must lie on the dual lattice `2 pi / (n_Q dQ)` and strictly below
/// the Nyquist wavenumber, otherwise the mode is not periodic on the grid.
pub fn band_mode(n: u32, kappa: f64, grid: &GridSpec) -> Result<(BandMode, KvnState)> {
    let length = grid.q.max;
    wall_rows(grid, length)?;
    let energy = band_energy(n, kappa, length, &grid.units)?;
    let k = n as f64 * PI / length;
    if k >= grid.q.nyquist() {
        return Err(KvnError::Nyquist(format!("k_n = {k} is not below the q Nyquist {}", grid.q.nyquist())));
    }
    if kappa.abs() >= grid.dual.nyquist() {
        return Err(KvnError::Nyquist(format!(
            "kappa = {kappa} is not below the dual Nyquist {}",
            grid.dual.nyquist()
        )));
    }
    let lattice = 2.0 * PI / grid.dual.extent();
    if !on_lattice(kappa, lattice) {
        return Err(KvnError::InvalidParameter(format!(
            "kappa = {kappa} is not a multiple of the dual lattice spacing {lattice}"
        )));
    }
    let state = KvnState::from_fn(*grid, Representation::PositionDual, |q, qd| {
        Complex64::new((k * q + kappa * qd).cos(), 0.0)
    })?
    .normalized()?;
    Ok((BandMode { n, kappa, energy }, state))
}

/// `L psi = -(hbar^2 / m) d_q d_Q psi`, spectrally.
pub fn apply_generator(state: &KvnState) -> Result<Array2<Complex64>> {
    state.require(Representation::PositionDual)?;
    let g = state.grid();
    let dq = derivative(state.amplitudes(), Direction::Position, &g.q.derivative_wavenumbers());
    let dqd = derivative(&dq, Direction::Dual, &g.dual.derivative_wavenumbers());
    let c = -g.units.hbar * g.units.hbar / g.units.mass;
    Ok(dqd.mapv(|z| z * c))
}

/// Returns `(||L psi - E psi|| / ||psi||, rayleigh)` where `E` is
/// `energy_guess` or the Rayleigh quotient `Re <psi, L psi> / <psi, psi>`.
pub fn generator_residual(state: &KvnState, energy_guess: Option<f64>) -> Result<(f64, f64)> {
    let lpsi = apply_generator(state)?;
    let psi = state.amplitudes();
    let nn: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if nn == 0.0 {
        return Ok((0.0, 0.0));
    }
    let num: Complex64 = psi.iter().zip(lpsi.iter()).map(|(a, b)| a.conj() * b).sum();
    let rayleigh = num.re / nn;
    let e = energy_guess.unwrap_or(rayleigh);
    let r: f64 = psi.iter().zip(lpsi.iter()).map(|(a, b)| (b - a * e).norm_sqr()).sum();
    Ok(((r / nn).sqrt(), rayleigh))
}

/// `E_n = n^2 pi^2 hbar^2 / (2 m L^2)` for `n = 1..=n_max`.
pub fn quantum_box_levels(n_max: u32, length: f64, units: &UnitSystem) -> Result<Vec<QuantumLevel>> {
    if n_max < 1 {
        return Err(KvnError::InvalidParameter("n_max must be at least 1".into()));
    }
    if !(length > 0.0) {
        return Err(KvnError::InvalidParameter(format!("box length must be positive, got {length}")));
    }
    let unit = PI * PI * units.hbar * units.hbar / (2.0 * units.mass * length * length);
    Ok((1..=n_max)
        .map(|n| QuantumLevel {
            n,
            energy: (n as f64).powi(2) * unit,
        })
        .collect())
}

/// Band energies `(kappa, E_{n, kappa})` for a list of `kappa`.
pub fn energy_sweep(n: u32, kappas: &[f64], length: f64, units: &UnitSystem) -> Result<Vec<(f64, f64)>> {
    if let Some(k) = kappas.iter().find(|k| !k.is_finite()) {
        return Err(KvnError::NonFinite(format!("kappa = {k}")));
    }
    kappas
        .iter()
        .map(|&k| band_energy(n, k, length, units).map(|e| (k, e)))
        .collect()
}

/// Largest `|E_{i+1} - E_i|` over consecutive sweep entries.
pub fn max_adjacent_gap(sweep: &[(f64, f64)]) -> f64 {
    sweep.windows(2).map(|w| (w[1].1 - w[0].1).abs()).fold(0.0, f64::max)
}
