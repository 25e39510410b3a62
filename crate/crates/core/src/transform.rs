//! Partial Fourier transform in the momentum variable:
//!
//! ```text
//! psi(q, Q) = (2 pi hbar)^(-1/2) ∫ exp(+i Q p / hbar) Psi(q, p) dp
//! Psi(q, p) = (2 pi hbar)^(-1/2) ∫ exp(-i Q p / hbar) psi(q, Q) dQ
//! ```
//!
//! On centred grids with `dp dQ = 2 pi hbar / n` the Riemann sum of these
//! integrals is a DFT up to the checkerboard factors `(-1)^j (-1)^k` and the
//! constant `exp(i pi n / 2)`, so the FFT result equals direct quadrature.

use ndarray::{Array2, Axis as NdAxis};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{KvnError, Result};
use crate::fourier::{fft_lanes, Direction};
use crate::state::{KvnState, Representation};

#[inline]
fn checker(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `exp(i pi n / 2)` for even `n`.
fn offset_phase(n: usize) -> f64 {
    if (n / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn apply_checker(field: &mut Array2<Complex64>, factor: f64) {
    field.axis_iter_mut(NdAxis(0)).into_par_iter().for_each(|mut row| {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= checker(j) * factor;
        }
    });
}

/// `(q, p) -> (q, Q)`.
pub fn to_dual(state: &KvnState) -> Result<KvnState> {
    state.require(Representation::PositionMomentum)?;
    let grid = state.grid();
    if !grid.dual.is_symmetric() {
        return Err(KvnError::InvalidGrid("momentum axis must be symmetric about 0".into()));
    }
    let target = grid.conjugate_dual()?;
    let n = grid.dual.n;
    let c = grid.d_dual() / (2.0 * std::f64::consts::PI * grid.units.hbar).sqrt();

    let mut field = state.amplitudes().clone();
    apply_checker(&mut field, 1.0);
    // unnormalised inverse DFT = n * normalised inverse
    fft_lanes(&mut field, Direction::Dual, true);
    apply_checker(&mut field, c * n as f64 * offset_phase(n));
    KvnState::new(target, Representation::PositionDual, field, state.time())
}

/// `(q, Q) -> (q, p)`.
pub fn to_momentum(state: &KvnState) -> Result<KvnState> {
    state.require(Representation::PositionDual)?;
    let grid = state.grid();
    if !grid.dual.is_symmetric() {
        return Err(KvnError::InvalidGrid("dual axis must be symmetric about 0".into()));
    }
    let target = grid.conjugate_dual()?;
    let n = grid.dual.n;
    let c = grid.d_dual() / (2.0 * std::f64::consts::PI * grid.units.hbar).sqrt();

    let mut field = state.amplitudes().clone();
    apply_checker(&mut field, 1.0);
    fft_lanes(&mut field, Direction::Dual, false);
    apply_checker(&mut field, c * offset_phase(n));
    KvnState::new(target, Representation::PositionMomentum, field, state.time())
}

/// Converts to the requested representation, cloning if already there.
pub fn to_representation(state: &KvnState, rep: Representation) -> Result<KvnState> {
    match (state.representation(), rep) {
        (a, b) if a == b => Ok(state.clone()),
        (Representation::PositionMomentum, Representation::PositionDual) => to_dual(state),
        _ => to_momentum(state),
    }
}
