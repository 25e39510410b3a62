use num_complex::Complex64;
use rayon::prelude::*;

use super::kernel::{propagate_image_kernel, ImageSumPolicy};
use crate::boundary::{fold_billiard, mirror_asymmetry, mirror_symmetrize, wall_rows};
use crate::error::{KvnError, Result};
use crate::fourier::{fft_lanes, trig_eval, Direction};
use crate::grid::GridSpec;
use crate::state::{GaussianSpec, KvnState, Representation};
use crate::transform::{to_dual, to_momentum};

/// How [`evolve_box`] realises the confined flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoxBackend {
    /// Pull every `(q, p)` back along its reflected free flight.
    Characteristics,
    /// Quadrature against the image-sum kernel in `(q, Q)`.
    ImageKernel(ImageSumPolicy),
}

/// Mirror-symmetric Gaussian for the box `[0, L]`, normalised on the doubled grid.
///
/// The packet must clear both walls by six widths.
pub fn box_gaussian_state(grid: &GridSpec, length: f64, spec: &GaussianSpec) -> Result<KvnState> {
    wall_rows(grid, length)?;
    let clearance = 6.0 * spec.width_q;
    if spec.center_q - clearance < 0.0 || spec.center_q + clearance > length {
        return Err(KvnError::InvalidParameter(format!(
            "packet at q = {} with width {} touches a wall of [0, {length}]",
            spec.center_q, spec.width_q
        )));
    }
    let mirror = GaussianSpec::new(-spec.center_q, -spec.center_dual, spec.width_q, spec.width_dual);
    let a = crate::state::make_gaussian_state(grid, Representation::PositionMomentum, spec, false)?;
    let b = crate::state::make_gaussian_state(grid, Representation::PositionMomentum, &mirror, false)?;
    // the seam row q = -L is its own mirror; project so symmetry is exact there too
    mirror_symmetrize(&a.plus(&b)?)?.normalized()
}

/// Evolves a mirror-symmetric `(q, p)` box state for time `t`.
pub fn evolve_box(state: &KvnState, t: f64, length: f64, backend: BoxBackend) -> Result<KvnState> {
    state.require(Representation::PositionMomentum)?;
    let g = *state.grid();
    wall_rows(&g, length)?;
    if !g.dual.is_symmetric() {
        return Err(KvnError::InvalidGrid("momentum axis must be symmetric about 0".into()));
    }
    let asym = mirror_asymmetry(state);
    if asym > 1e-8 {
        return Err(KvnError::InvalidParameter(format!(
            "box state violates psi(q, p) = psi(-q, -p) by {asym:.3e}; build it with box_gaussian_state or mirror_symmetrize"
        )));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    match backend {
        BoxBackend::Characteristics => characteristics(state, t, length),
        BoxBackend::ImageKernel(policy) => {
            let dual = to_dual(state)?;
            let out = propagate_image_kernel(&dual, t, length, &policy)?;
            to_momentum(&out.state)
        }
    }
}

fn characteristics(state: &KvnState, t: f64, length: f64) -> Result<KvnState> {
    let g = *state.grid();
    let (n_q, n_p) = g.shape();
    let mut coeffs = state.amplitudes().clone();
    fft_lanes(&mut coeffs, Direction::Position, false);
    let scale = 1.0 / n_q as f64;
    let columns: Vec<Vec<Complex64>> = (0..n_p)
        .map(|j| coeffs.column(j).iter().map(|z| z * scale).collect())
        .collect();
    let k = g.q.fft_wavenumbers();
    let m = g.units.mass;

    let mut out = ndarray::Array2::<Complex64>::zeros(g.shape());
    out.axis_iter_mut(ndarray::Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let q = g.q.point(i);
            for j in 0..n_p {
                let p = g.dual.point(j);
                let (qs, sign) = fold_billiard(q - p * t / m, length);
                let src = if sign > 0.0 { j } else { g.dual.mirror_index(j) };
                row[j] = trig_eval(&columns[src], &k, qs - g.q.min);
            }
        });
    state.with_amplitudes(out, state.time() + t)
}
