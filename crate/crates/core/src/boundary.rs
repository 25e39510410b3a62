//! Elastic walls: the billiard fold, Q-parity checks, probability currents,
//! the continuity residual and the Green's-identity boundary form.
//!
//! Box states live on the doubled domain `q in [-L, L)`, mirror-symmetric
//! under `(q, p) -> (-q, -p)` (equivalently `(q, Q) -> (-q, -Q)`). The walls
//! `q = 0` and `q = L` are grid rows `n/2` and `0` (the latter being the
//! periodic image of `-L`).

use ndarray::{Array1, Array2, Axis as NdAxis};
use num_complex::Complex64;

use crate::error::{KvnError, Result};
use crate::fourier::{derivative, Direction};
use crate::grid::GridSpec;
use crate::state::{KvnState, Representation};

/// Folds an unfolded free-flight position `x` back into `[0, L]`.
///
/// Returns the folded position and the momentum sign: `+1` after an even
/// number of reflections, `-1` after an odd number. Period `2L` triangle wave.
pub fn fold_billiard(x: f64, length: f64) -> (f64, f64) {
    let period = 2.0 * length;
    let y = x.rem_euclid(period);
    if y <= length {
        (y, 1.0)
    } else {
        (period - y, -1.0)
    }
}

/// Specular reflection `(q, p) -> (q, -p)` of samples at a wall.
pub fn reflect_specular(samples: &[(f64, f64)]) -> Vec<(f64, f64)> {
    samples.iter().map(|&(q, p)| (q, -p)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wall {
    /// `q = 0`
    Left,
    /// `q = L`
    Right,
}

/// Row indices of the two walls on a wall-aligned doubled grid.
pub fn wall_rows(grid: &GridSpec, length: f64) -> Result<[(Wall, usize); 2]> {
    let tol = 1e-12 * length.abs().max(1.0);
    if !(length > 0.0) || (grid.q.min + length).abs() > tol || (grid.q.max - length).abs() > tol {
        return Err(KvnError::NotWallAligned(format!(
            "expected q axis [-{length}, {length}), got [{}, {})",
            grid.q.min, grid.q.max
        )));
    }
    Ok([(Wall::Left, grid.q.n / 2), (Wall::Right, 0)])
}

/// Largest violation of `psi(q, p) = psi(-q, -p)` relative to `max |psi|`.
/// Holds in either representation.
pub fn mirror_asymmetry(state: &KvnState) -> f64 {
    let g = state.grid();
    let a = state.amplitudes();
    let max = state.max_amplitude();
    if max == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..g.q.n {
        let mi = g.q.mirror_index(i);
        for j in 0..g.dual.n {
            let mj = g.dual.mirror_index(j);
            worst = worst.max((a[[i, j]] - a[[mi, mj]]).norm());
        }
    }
    worst / max
}

/// `(psi + mirror(psi)) / 2`: projects onto the box-compliant subspace.
pub fn mirror_symmetrize(state: &KvnState) -> Result<KvnState> {
    let g = state.grid();
    let a = state.amplitudes();
    let out = Array2::from_shape_fn(g.shape(), |(i, j)| {
        0.5 * (a[[i, j]] + a[[g.q.mirror_index(i), g.dual.mirror_index(j)]])
    });
    state.with_amplitudes(out, state.time())
}

/// `psi(q, Q) + psi(q, -Q)`: even in `Q` on every row.
pub fn dual_symmetrize(state: &KvnState) -> Result<KvnState> {
    state.require(Representation::PositionDual)?;
    let g = state.grid();
    let a = state.amplitudes();
    let out = Array2::from_shape_fn(g.shape(), |(i, j)| a[[i, j]] + a[[i, g.dual.mirror_index(j)]]);
    state.with_amplitudes(out, state.time())
}

/// Probability currents in the `(q, Q)` representation:
/// `J_q = (hbar/m) Im(psi* dpsi/dQ)`, `J_Q = (hbar/m) Im(psi* dpsi/dq)`.
pub fn currents(state: &KvnState) -> Result<(Array2<f64>, Array2<f64>)> {
    state.require(Representation::PositionDual)?;
    let g = state.grid();
    let c = g.units.hbar / g.units.mass;
    let psi = state.amplitudes();
    let d_dual = derivative(psi, Direction::Dual, &g.dual.derivative_wavenumbers());
    let d_q = derivative(psi, Direction::Position, &g.q.derivative_wavenumbers());
    let jq = Array2::from_shape_fn(g.shape(), |(i, j)| c * (psi[[i, j]].conj() * d_dual[[i, j]]).im);
    let jd = Array2::from_shape_fn(g.shape(), |(i, j)| c * (psi[[i, j]].conj() * d_q[[i, j]]).im);
    Ok((jq, jd))
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn max_norm(a: &Array2<Complex64>) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

fn real_derivative(a: &Array2<f64>, dir: Direction, k: &[f64]) -> Array2<f64> {
    let c = a.mapv(|x| Complex64::new(x, 0.0));
    derivative(&c, dir, k).mapv(|z| z.re)
}

fn continuity_at(
    state: &KvnState,
    dt: f64,
    evolver: &dyn Fn(&KvnState, f64) -> Result<KvnState>,
) -> Result<f64> {
    let g = *state.grid();
    let forward = evolver(state, dt)?;
    let backward = evolver(state, -dt)?;
    forward.require(Representation::PositionDual)?;
    backward.require(Representation::PositionDual)?;
    let drho = (&forward.density() - &backward.density()) / (2.0 * dt);

    let (jq, jd) = currents(state)?;
    let div = &real_derivative(&jq, Direction::Position, &g.q.derivative_wavenumbers())
        + &real_derivative(&jd, Direction::Dual, &g.dual.derivative_wavenumbers());

    let psi = state.amplitudes();
    let d_q = derivative(psi, Direction::Position, &g.q.derivative_wavenumbers());
    let d_dual = derivative(psi, Direction::Dual, &g.dual.derivative_wavenumbers());
    let d_mixed = derivative(&d_q, Direction::Dual, &g.dual.derivative_wavenumbers());
    let c = g.units.hbar / g.units.mass;
    let scale = max_abs(&drho)
        .max(c * max_norm(psi) * max_norm(&d_mixed))
        .max(c * max_norm(&d_q) * max_norm(&d_dual));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for i in 1..g.q.n {
        for j in 1..g.dual.n {
            worst = worst.max((drho[[i, j]] + div[[i, j]]).abs());
        }
    }
    Ok(worst / scale)
}

/// Residual of `d rho/dt + d J_q/dq + d J_Q/dQ = 0` on a `(q, Q)` state.
///
/// `d rho/dt` is a central difference over `[-dt_probe, dt_probe]` using
/// `evolver(state, t)`, which must return `(q, Q)` states. The result is the
/// largest interior residual, normalised by the larger of the measured density
/// rate and the current-divergence scale `(hbar/m) |psi| |psi_qQ|`. A residual
/// above `1e-3` that still shrinks when the probe step is halved is reported
/// as [`KvnError::ProbeTooCoarse`].
pub fn continuity_residual(
    state: &KvnState,
    dt_probe: f64,
    evolver: &dyn Fn(&KvnState, f64) -> Result<KvnState>,
) -> Result<f64> {
    state.require(Representation::PositionDual)?;
    if !(dt_probe > 0.0) {
        return Err(KvnError::InvalidParameter("dt_probe must be positive".into()));
    }
    let r = continuity_at(state, dt_probe, evolver)?;
    if r > 1e-3 {
        let half = continuity_at(state, 0.5 * dt_probe, evolver)?;
        if half < 0.5 * r {
            return Err(KvnError::ProbeTooCoarse { residual: r });
        }
    }
    Ok(r)
}

/// Per-wall parity and current diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallReport {
    pub wall: Wall,
    /// `max_Q |psi(q_w, Q) - psi(q_w, -Q)| / max |psi|`
    pub max_parity_asymmetry: f64,
    /// `max_Q |J_q(q_w, Q)|`
    pub max_wall_current: f64,
    /// `max_wall_current / max |J_q|` over the whole grid (0 when no current flows)
    pub relative_wall_current: f64,
    /// `∫ J_q(q_w, Q) dQ`, which vanishes for every Q-even wall row
    pub net_wall_flux: f64,
}

/// Q-parity and wall-current report for both walls of a `(q, Q)` box state.
pub fn qparity_check(state: &KvnState, length: f64) -> Result<[WallReport; 2]> {
    state.require(Representation::PositionDual)?;
    let g = *state.grid();
    let rows = wall_rows(&g, length)?;
    let psi = state.amplitudes();
    let max = state.max_amplitude();
    let (jq, _) = currents(state)?;
    let jmax = max_abs(&jq);
    let report = |(wall, i): (Wall, usize)| {
        let mut asym = 0.0f64;
        let mut cur = 0.0f64;
        let mut flux = 0.0;
        for k in 0..g.dual.n {
            asym = asym.max((psi[[i, k]] - psi[[i, g.dual.mirror_index(k)]]).norm());
            cur = cur.max(jq[[i, k]].abs());
            flux += jq[[i, k]];
        }
        WallReport {
            wall,
            max_parity_asymmetry: if max > 0.0 { asym / max } else { 0.0 },
            max_wall_current: cur,
            relative_wall_current: if jmax > 0.0 { cur / jmax } else { 0.0 },
            net_wall_flux: flux * g.d_dual(),
        }
    };
    Ok([report(rows[0]), report(rows[1])])
}

fn row_derivative(row: &Array1<Complex64>, k: &[f64]) -> Array1<Complex64> {
    let field = row.clone().insert_axis(NdAxis(0));
    derivative(&field, Direction::Dual, k).index_axis_move(NdAxis(0), 0)
}

/// `∫ dQ [psi1* dpsi2/dQ - (dpsi1/dQ)* psi2]` evaluated at `q = L` minus `q = 0`.
pub fn boundary_form(psi1: &KvnState, psi2: &KvnState, length: f64) -> Result<Complex64> {
    psi1.require(Representation::PositionDual)?;
    psi1.check_compatible(psi2)?;
    let g = *psi1.grid();
    let rows = wall_rows(&g, length)?;
    let k = g.dual.derivative_wavenumbers();
    let at = |i: usize| {
        let a = psi1.amplitudes().row(i).to_owned();
        let b = psi2.amplitudes().row(i).to_owned();
        let da = row_derivative(&a, &k);
        let db = row_derivative(&b, &k);
        let s: Complex64 = (0..g.dual.n).map(|j| a[j].conj() * db[j] - da[j].conj() * b[j]).sum();
        s * g.d_dual()
    };
    let left = at(rows[0].1);
    let right = at(rows[1].1);
    Ok(right - left)
}
