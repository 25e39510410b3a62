use num_complex::Complex64;

use super::free::{check_transport, evolve_free_spectral};
use crate::error::Result;
use crate::fourier::{apply_lane_multiplier, Direction};
use crate::state::{KvnState, Representation};
use crate::transform::{to_dual, to_momentum};

/// Uniform field `V = m g q` (`g > 0` pulls toward `q_min`).
///
/// In `(q, Q)`: `psi(q, Q, t) = exp(-i m g Q t / hbar) psi_free(q + g t^2 / 2, Q, t)`.
/// A `(q, p)` state is routed through the dual representation after checking
/// that `(q, p) -> (q + p t / m - g t^2 / 2, p - m g t)` keeps it on the grid.
pub fn evolve_gravity(state: &KvnState, t: f64, g_accel: f64) -> Result<KvnState> {
    if t == 0.0 {
        return Ok(state.clone());
    }
    match state.representation() {
        Representation::PositionMomentum => {
            let m = state.grid().units.mass;
            check_transport(state, |q, p| (q + p * t / m - 0.5 * g_accel * t * t, p - m * g_accel * t))?;
            to_momentum(&gravity_dual(&to_dual(state)?, t, g_accel)?)
        }
        Representation::PositionDual => gravity_dual(state, t, g_accel),
    }
}

fn gravity_dual(state: &KvnState, t: f64, g_accel: f64) -> Result<KvnState> {
    let free = evolve_free_spectral(state, t)?;
    let g = *state.grid();
    let shift = 0.5 * g_accel * t * t;
    let mut field = free.into_amplitudes();
    let mult: Vec<Complex64> = g.q.derivative_wavenumbers().iter().map(|k| Complex64::cis(k * shift)).collect();
    apply_lane_multiplier(&mut field, Direction::Position, &mult);
    let c = g.units.mass * g_accel * t / g.units.hbar;
    for ((_, j), z) in field.indexed_iter_mut() {
        *z *= Complex64::cis(-c * g.dual.point(j));
    }
    state.with_amplitudes(field, state.time() + t)
}
