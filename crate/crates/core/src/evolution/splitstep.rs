use ndarray::Array2;
use num_complex::Complex64;

use super::potential::PotentialSpec;
use crate::error::{KvnError, Result};
use crate::fourier::apply_2d_multiplier;
use crate::state::{KvnState, Representation};

/// Strang splitting of `i hbar d/dt psi = [-(hbar^2/m) d_q d_Q + V'(q) Q] psi`.
///
/// Potential half steps are diagonal in `(q, Q)`, the mixed-derivative step is
/// diagonal in double-Fourier space. Each factor is a pure phase. The step is
/// rejected when `max |V'| dQ dt / hbar > pi / 2`, i.e. when a single kick
/// moves momentum by more than a quarter of the grid's momentum band.
pub fn evolve_splitstep(state: &KvnState, potential: &PotentialSpec, dt: f64, n_steps: usize) -> Result<KvnState> {
    state.require(Representation::PositionDual)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(KvnError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if n_steps == 0 {
        return Ok(state.clone());
    }
    let g = *state.grid();
    let hbar = g.units.hbar;
    let qs = g.q.points();
    let vp: Vec<f64> = qs.iter().map(|&q| potential.v_prime(q)).collect();
    let vp_max = vp.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let kick_phase = vp_max * g.d_dual() * dt / hbar;
    if kick_phase > 0.5 * std::f64::consts::PI {
        return Err(KvnError::Nyquist(format!(
            "max |V'| dQ dt / hbar = {kick_phase:.3} exceeds pi/2"
        )));
    }
    let duals = g.dual.points();
    let phase = |frac: f64| {
        Array2::from_shape_fn(g.shape(), |(i, j)| Complex64::cis(-vp[i] * duals[j] * dt * frac / hbar))
    };
    let half = phase(0.5);
    let full = phase(1.0);
    let kq = g.q.derivative_wavenumbers();
    let kd = g.dual.derivative_wavenumbers();
    let c = hbar * dt / g.units.mass;
    let kinetic = Array2::from_shape_fn(g.shape(), |(i, j)| Complex64::cis(-c * kq[i] * kd[j]));

    let mut field = state.amplitudes() * &half;
    for step in 0..n_steps {
        apply_2d_multiplier(&mut field, |i, j| kinetic[[i, j]]);
        if step + 1 < n_steps {
            field *= &full;
        }
    }
    field *= &half;
    if field.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(KvnError::NonFinite("split-step amplitudes diverged".into()));
    }
    state.with_amplitudes(field, state.time() + dt * n_steps as f64)
}
