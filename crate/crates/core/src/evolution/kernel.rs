//! Free and method-of-images propagators in the `(q, Q)` representation.

use std::f64::consts::PI;

use ndarray::{Array2, Axis as NdAxis};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::boundary::wall_rows;
use crate::error::{KvnError, Result};
use crate::grid::UnitSystem;
use crate::state::{KvnState, Representation};

/// Symmetric truncation of the image sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSumPolicy {
    /// Shells `-n_images ..= n_images` are summed.
    pub n_images: usize,
    /// Largest admissible relative weight of the two outermost shells
    /// (`|n| = n_images` and `n_images - 1`, or just `|n| = 1` when `n_images = 1`).
    pub tail_tol: f64,
}

impl Default for ImageSumPolicy {
    fn default() -> Self {
        Self {
            n_images: 8,
            tail_tol: 1e-8,
        }
    }
}

impl ImageSumPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.n_images < 1 {
            return Err(KvnError::InvalidParameter("n_images must be at least 1".into()));
        }
        if !(self.tail_tol >= 0.0) {
            return Err(KvnError::InvalidParameter("tail_tol must be nonnegative".into()));
        }
        Ok(())
    }
}

/// `K0 = m / (2 pi hbar t) exp[i m (q - q') (Q - Q') / (hbar t)]`.
pub fn kernel_free(units: &UnitSystem, t: f64, q: f64, dual: f64, q_src: f64, dual_src: f64) -> Result<Complex64> {
    if t == 0.0 {
        return Err(KvnError::SingularTime);
    }
    let (m, hbar) = (units.mass, units.hbar);
    let amp = m / (2.0 * PI * hbar * t);
    Ok(Complex64::cis(m * (q - q_src) * (dual - dual_src) / (hbar * t)) * amp)
}

/// Truncated image sum
/// `sum_n K0(t; q - 2nL, Q; q', Q') + K0(t; q - (2nL - 2q'), Q; q', -Q')`.
///
/// Every term has modulus `m / (2 pi hbar t)`, so the sum converges only
/// after integration against a state; the tail check therefore lives in
/// [`propagate_image_kernel`].
#[allow(clippy::too_many_arguments)]
pub fn kernel_box(
    units: &UnitSystem,
    t: f64,
    q: f64,
    dual: f64,
    q_src: f64,
    dual_src: f64,
    length: f64,
    policy: &ImageSumPolicy,
) -> Result<Complex64> {
    policy.validate()?;
    if t == 0.0 {
        return Err(KvnError::SingularTime);
    }
    for (name, x) in [("q", q), ("q'", q_src)] {
        if !(0.0..=length).contains(&x) {
            return Err(KvnError::OutsideGrid(format!("{name} = {x} is outside [0, {length}]")));
        }
    }
    let n = policy.n_images as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for s in -n..=n {
        let shift = 2.0 * s as f64 * length;
        acc += kernel_free(units, t, q - shift, dual, q_src, dual_src)?;
        acc += kernel_free(units, t, q - (shift - 2.0 * q_src), dual, q_src, -dual_src)?;
    }
    Ok(acc)
}

/// Result of an image-kernel quadrature.
#[derive(Debug, Clone)]
pub struct ImagePropagation {
    pub state: KvnState,
    /// Norm of the two outermost shells' contribution relative to the result.
    pub tail_estimate: f64,
}

/// Propagates a `(q, Q)` box state by direct quadrature against the image
/// kernel over source points `q'` in `[0, L]`, `Q'` on the dual grid.
///
/// The `Q'` sum for a given source/target pair is the trapezoid rule for the
/// momentum amplitude at `p = m (q_eff - q') / t`; pairs whose momentum lies
/// outside the grid's momentum band are skipped because the band-limited
/// state has no amplitude there and the sampled sum would alias.
pub fn propagate_image_kernel(
    state: &KvnState,
    t: f64,
    length: f64,
    policy: &ImageSumPolicy,
) -> Result<ImagePropagation> {
    policy.validate()?;
    state.require(Representation::PositionDual)?;
    if t == 0.0 {
        return Err(KvnError::SingularTime);
    }
    let g = *state.grid();
    wall_rows(&g, length)?;
    let (m, hbar) = (g.units.mass, g.units.hbar);
    let a = m / (hbar * t);
    let dq = g.dq();
    let d_dual = g.d_dual();
    let q_dual_max = 0.5 * g.dual.n as f64 * d_dual;
    if (a * q_dual_max * dq).abs() > PI {
        return Err(KvnError::Unresolved(format!(
            "kernel phase step m Q_max dq / (hbar t) = {:.3} exceeds pi; refine q or propagate longer",
            (a * q_dual_max * dq).abs()
        )));
    }
    let p_band = PI * hbar / d_dual;
    let pre = m / (2.0 * PI * hbar * t);

    // physical source rows q' in [0, L]: the upper half plus the q = L image at index 0
    let n_q = g.q.n;
    let mut sources: Vec<(f64, f64, usize)> = Vec::new();
    let amp_max = state.max_amplitude();
    for i in (n_q / 2)..n_q {
        sources.push((g.q.point(i), if i == n_q / 2 { 0.5 } else { 1.0 }, i));
    }
    sources.push((length, 0.5, 0));
    let psi = state.amplitudes();
    sources.retain(|&(_, _, i)| psi.row(i).iter().any(|z| z.norm() > 1e-15 * amp_max));

    let duals = g.dual.points();
    let n_d = g.dual.n;
    let shells = policy.n_images as i64;

    // inner[l] for target offset d and dual sign s: sum_l exp(-i s a d Q'_l) psi(q', Q'_l) dQ
    let inner_sum = |row: usize, d: f64, sign: f64| -> Complex64 {
        let step = Complex64::cis(-sign * a * d * d_dual);
        let mut ph = Complex64::cis(-sign * a * d * duals[0]);
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..n_d {
            acc += ph * psi[[row, l]];
            ph *= step;
        }
        acc * d_dual
    };

    let mut out = Array2::<Complex64>::zeros(g.shape());
    let mut tail = Array2::<Complex64>::zeros(g.shape());
    out.axis_iter_mut(NdAxis(0))
        .into_par_iter()
        .zip(tail.axis_iter_mut(NdAxis(0)).into_par_iter())
        .enumerate()
        .for_each(|(i, (mut row_out, mut row_tail))| {
            let q = g.q.point(i);
            let mut acc = vec![Complex64::new(0.0, 0.0); n_d];
            let mut acc_tail = vec![Complex64::new(0.0, 0.0); n_d];
            for s in -shells..=shells {
                let shift = 2.0 * s as f64 * length;
                let outer_shell = s.unsigned_abs() >= (policy.n_images as u64 - 1).max(1);
                for &(qs, w, row) in &sources {
                    // direct image: offset q - 2nL - q', dual Q - Q'
                    // mirrored image: offset q - 2nL + q', dual Q + Q'
                    for (d, sign) in [(q - shift - qs, 1.0), (q - shift + qs, -1.0)] {
                        if (m * d / t).abs() >= p_band {
                            continue;
                        }
                        let inner = inner_sum(row, d, sign);
                        if inner.norm() == 0.0 {
                            continue;
                        }
                        let c = inner * (pre * w * dq);
                        let step = Complex64::cis(a * d * d_dual);
                        let mut ph = Complex64::cis(a * d * duals[0]);
                        for k in 0..n_d {
                            let term = c * ph;
                            acc[k] += term;
                            if outer_shell {
                                acc_tail[k] += term;
                            }
                            ph *= step;
                        }
                    }
                }
            }
            for k in 0..n_d {
                row_out[k] = acc[k];
                row_tail[k] = acc_tail[k];
            }
        });

    let result = state.with_amplitudes(out, state.time() + t)?;
    let tail_norm = (tail.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.cell()).sqrt();
    let total = result.norm();
    let tail_estimate = if total > 0.0 { tail_norm / total } else { 0.0 };
    if tail_estimate > policy.tail_tol {
        return Err(KvnError::ImageTruncation {
            estimate: tail_estimate,
            tol: policy.tail_tol,
        });
    }
    Ok(ImagePropagation {
        state: result,
        tail_estimate,
    })
}
