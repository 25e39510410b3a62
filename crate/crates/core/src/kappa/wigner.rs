use std::f64::consts::PI;

use ndarray::{Array1, Array2, Axis as NdAxis};
use num_complex::Complex64;
use rayon::prelude::*;

use super::schrodinger::{check_phases, strang_steps, WaveFunction1D};
use crate::error::{KvnError, Result};
use crate::evolution::PotentialSpec;
use crate::grid::Axis;

/// Phase-space quasi-density on `(q, p)`; `q` is the wavefunction's axis.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerField {
    pub q: Axis,
    pub p: Axis,
    pub values: Array2<f64>,
    pub kappa: f64,
    pub hbar_eff: f64,
}

impl WignerField {
    /// `∫ W dq dp` by the rectangle rule.
    pub fn integral(&self) -> f64 {
        self.values.sum() * self.q.spacing() * self.p.spacing()
    }

    /// `∫ W dp` at each `q`.
    pub fn position_marginal(&self) -> Vec<f64> {
        self.values.rows().into_iter().map(|r| r.sum() * self.p.spacing()).collect()
    }
}

/// The momentum axis on which the discrete transform has the exact position
/// marginal: `n` points spaced `pi hbar_eff / (n dq)`, centred on zero.
pub fn conjugate_momentum_axis(q: &Axis, hbar_eff: f64) -> Result<Axis> {
    Axis::centered(q.n, PI * hbar_eff / (q.n as f64 * q.spacing()))
}

/// `W(q, p) = (1 / 2 pi hbar_eff) ∫ dy Psi*(q + y/2) Psi(q - y/2) exp(i p y / hbar_eff)`
/// with `hbar_eff = kappa hbar`.
///
/// `y = 2 s dq`, with `Psi` taken as zero outside the q domain. On [`conjugate_momentum_axis`] the position
/// marginal is exact and `∫ W dq dp = ||Psi||^2`. The literal prefactor `(2 pi kappa hbar)^(-1/2)`
/// would give `sqrt(2 pi kappa hbar) ||Psi||^2`; the extra factor is divided
/// out to compare against probability densities. `p` may be any axis whose
/// extent stays inside `|p| < pi hbar_eff / (2 dq)`.
pub fn wigner_kappa(psi: &WaveFunction1D, p: &Axis, kappa: f64) -> Result<WignerField> {
    let hb = psi.hbar_eff();
    if !(kappa > 0.0) {
        return Err(KvnError::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    let q = *psi.axis();
    let dq = q.spacing();
    let p_limit = PI * hb / (2.0 * dq);
    if p.min.abs().max(p.max.abs()) > p_limit * (1.0 + 1e-12) {
        return Err(KvnError::GridMismatch(format!(
            "momentum axis [{}, {}) exceeds the aliasing limit {p_limit} for dq = {dq}, hbar_eff = {hb}",
            p.min, p.max
        )));
    }
    let n = q.n as i64;
    let a = psi.amplitudes();
    let ps = p.points();
    let pre = dq / (PI * hb);
    let mut values = Array2::<f64>::zeros((q.n, p.n));
    values.axis_iter_mut(NdAxis(0)).into_par_iter().enumerate().for_each(|(i, mut row)| {
        let i = i as i64;
        // zero outside the domain; a periodic wrap would paint a ghost copy of
        // the state at the antipode
        let f: Vec<Complex64> = (0..n.min(i + 1).min(n - i))
            .map(|s| a[(i + s) as usize].conj() * a[(i - s) as usize])
            .collect();
        for (j, &pj) in ps.iter().enumerate() {
            let w = 2.0 * pj * dq / hb;
            let mut acc = f[0].re;
            for (s, fs) in f.iter().enumerate().skip(1) {
                acc += 2.0 * (fs * Complex64::cis(w * s as f64)).re;
            }
            row[j] = pre * acc;
        }
    });
    Ok(WignerField {
        q,
        p: *p,
        values,
        kappa,
        hbar_eff: hb,
    })
}

/// Checks `i hbar_eff d rho/dt = (H_u - H_v) rho` for `rho(u, v) = Psi*(v) Psi(u)`.
///
/// `d rho/dt` is a central difference of one Strang step forward and back.
/// The result is the largest residual over the grid divided by the largest of
/// `|i hbar_eff d rho/dt|`, `|H_u rho|` and `|H_v rho|`.
pub fn two_point_residual(psi: &WaveFunction1D, potential: &PotentialSpec, dt_probe: f64) -> Result<f64> {
    if !(dt_probe > 0.0) {
        return Err(KvnError::InvalidParameter("dt_probe must be positive".into()));
    }
    check_phases(psi, potential, dt_probe)?;
    let fwd = strang_steps(psi, potential, dt_probe, 1)?;
    let bwd = strang_steps(psi, potential, -dt_probe, 1)?;
    let a = psi.amplitudes();
    let (af, ab) = (fwd.amplitudes(), bwd.amplitudes());
    let h = psi.apply_hamiltonian(potential);
    let hb = psi.hbar_eff();
    let n = a.len();
    let c = Complex64::new(0.0, hb / (2.0 * dt_probe));

    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut worst = 0.0f64;
            let mut scale = 0.0f64;
            for v in 0..n {
                let lhs = c * (af[v].conj() * af[u] - ab[v].conj() * ab[u]);
                let hu = h[u] * a[v].conj();
                let hv = a[u] * h[v].conj();
                worst = worst.max((lhs - (hu - hv)).norm());
                scale = scale.max(lhs.norm()).max(hu.norm()).max(hv.norm());
            }
            (worst, scale)
        })
        .collect();
    let worst = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let scale = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

/// Density matrix `rho(u, v) = Psi*(v) Psi(u)`.
pub fn two_point_density(psi: &WaveFunction1D) -> Array2<Complex64> {
    let a: &Array1<Complex64> = psi.amplitudes();
    Array2::from_shape_fn((a.len(), a.len()), |(u, v)| a[v].conj() * a[u])
}
