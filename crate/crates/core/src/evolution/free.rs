use num_complex::Complex64;

use crate::error::{KvnError, Result};
use crate::fourier::{apply_2d_multiplier, apply_lane_fn, Direction};
use crate::state::{KvnState, Representation};

/// Relative amplitude above which a cell counts as occupied support.
pub(crate) const SUPPORT_THRESHOLD: f64 = 1e-8;

/// Errors if any occupied `(q, p)` cell is carried off the grid by `map`.
pub(crate) fn check_transport<F>(state: &KvnState, map: F) -> Result<()>
where
    F: Fn(f64, f64) -> (f64, f64),
{
    let g = state.grid();
    let cut = SUPPORT_THRESHOLD * state.max_amplitude();
    let q_hi = g.q.max - g.dq();
    let p_hi = g.dual.max - g.d_dual();
    for ((i, j), z) in state.amplitudes().indexed_iter() {
        if z.norm() <= cut {
            continue;
        }
        let (q, p) = map(g.q.point(i), g.dual.point(j));
        if q < g.q.min || q > q_hi || p < g.dual.min || p > p_hi {
            return Err(KvnError::WrapAround(format!(
                "cell ({:.4}, {:.4}) is carried to ({q:.4}, {p:.4}), outside [{}, {}) x [{}, {})",
                g.q.point(i),
                g.dual.point(j),
                g.q.min,
                g.q.max,
                g.dual.min,
                g.dual.max
            )));
        }
    }
    Ok(())
}

/// Shifts every momentum row `p` by `p t / m` in position, periodically.
pub(crate) fn shear_rows(state: &KvnState, t: f64) -> Array {
    let g = *state.grid();
    let k = g.q.derivative_wavenumbers();
    let v: Vec<f64> = g.dual.points().iter().map(|p| p / g.units.mass).collect();
    let mut field = state.amplitudes().clone();
    apply_lane_fn(&mut field, Direction::Position, |mode, lane| {
        Complex64::cis(-k[mode] * v[lane] * t)
    });
    field
}

type Array = ndarray::Array2<Complex64>;

/// Free flight for a time `t` (either sign).
///
/// In `(q, Q)` every double-Fourier mode `(k, kappa)` picks up
/// `exp(-i hbar k kappa t / m)`. In `(q, p)` each momentum row is translated
/// by `p t / m`, which is `psi(q, p, t) = psi0(q - p t / m, p)`; support that
/// would cross the periodic seam is an error.
pub fn evolve_free_spectral(state: &KvnState, t: f64) -> Result<KvnState> {
    if !t.is_finite() {
        return Err(KvnError::InvalidParameter("evolution time must be finite".into()));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let g = *state.grid();
    match state.representation() {
        Representation::PositionDual => {
            let kq = g.q.derivative_wavenumbers();
            let kd = g.dual.derivative_wavenumbers();
            let c = g.units.hbar * t / g.units.mass;
            let mut field = state.amplitudes().clone();
            apply_2d_multiplier(&mut field, |i, j| Complex64::cis(-c * kq[i] * kd[j]));
            state.with_amplitudes(field, state.time() + t)
        }
        Representation::PositionMomentum => {
            let m = g.units.mass;
            check_transport(state, |q, p| (q + p * t / m, p))?;
            state.with_amplitudes(shear_rows(state, t), state.time() + t)
        }
    }
}
