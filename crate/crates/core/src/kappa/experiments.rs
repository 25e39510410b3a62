use ndarray::Array1;
use num_complex::Complex64;

use super::schrodinger::{evolve_schrodinger_kappa, WaveFunction1D};
use super::wigner::{two_point_residual, wigner_kappa, WignerField};
use crate::error::{KvnError, Result};
use crate::evolution::{evolve_free_spectral, PotentialSpec};
use crate::grid::{Axis, GridSpec, UnitSystem};
use crate::oracle::liouville_pullback;
use crate::state::{make_gaussian_state, GaussianSpec, Representation};

/// Uncorrelated phase-space Gaussian; widths are those of the density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceGaussian {
    pub q0: f64,
    pub p0: f64,
    pub sigma_q: f64,
    pub sigma_p: f64,
}

impl PhaseSpaceGaussian {
    pub fn density(&self, q: f64, p: f64) -> f64 {
        let (x, y) = ((q - self.q0) / self.sigma_q, (p - self.p0) / self.sigma_p);
        (-0.5 * (x * x + y * y)).exp() / (2.0 * std::f64::consts::PI * self.sigma_q * self.sigma_p)
    }

    /// Both widths scaled so that `sigma_q sigma_p = hbar_eff / 2`.
    pub fn minimum_spread(&self, hbar_eff: f64) -> Result<Self> {
        let s = (hbar_eff / (2.0 * self.sigma_q * self.sigma_p)).sqrt();
        if s > 1.0 + 1e-12 {
            return Err(KvnError::InvalidParameter(format!(
                "sigma_q sigma_p = {} is below hbar_eff / 2 = {}",
                self.sigma_q * self.sigma_p,
                0.5 * hbar_eff
            )));
        }
        Ok(Self {
            sigma_q: self.sigma_q * s,
            sigma_p: self.sigma_p * s,
            ..*self
        })
    }
}

/// Numerical setup for [`contraction_experiment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionSetup {
    pub q: Axis,
    /// Momentum axis on which the Wigner and Liouville densities are compared.
    pub p: Axis,
    pub hbar: f64,
    pub mass: f64,
    pub dt: f64,
    /// Probe step of the two-point residual.
    pub dt_probe: f64,
    /// Treat a non-monotone table with clean flags as an error.
    pub require_monotone: bool,
}

impl Default for ContractionSetup {
    fn default() -> Self {
        Self {
            q: Axis::new(-6.0, 6.0, 384).expect("static axis"),
            p: Axis::centered(128, 10.0 / 128.0).expect("static axis"),
            hbar: 1.0,
            mass: 1.0,
            dt: 1e-3,
            dt_probe: 1e-4,
            require_monotone: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionRow {
    pub kappa: f64,
    /// `∫ |W_kappa - rho_liouville| dq dp`.
    pub l1: f64,
    /// L1 change of the Wigner field when the step is halved.
    pub dt_change: f64,
    /// Fraction of `|Psi_hat|^2` in the upper half of the wavenumber band.
    pub spectral_tail: f64,
    /// Largest two-point residual at the initial and final states.
    pub two_point_residual: f64,
    /// Mass of the classical density outside the comparison grid.
    pub classical_loss: f64,
    /// Largest `|Psi|` in the outer tenth of the q domain relative to `max |Psi|`.
    pub edge_amplitude: f64,
}

impl ContractionRow {
    pub fn converged(&self) -> bool {
        self.spectral_tail <= 1e-10
            && self.edge_amplitude <= 1e-8
            && self.dt_change <= 1e-2 * self.l1
            && self.classical_loss <= 1e-6
    }
}

fn l1(a: &WignerField, b: &[f64]) -> f64 {
    a.values.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * a.q.spacing() * a.p.spacing()
}

fn edge_amplitude(psi: &WaveFunction1D) -> f64 {
    let a = psi.amplitudes();
    let n = a.len();
    let band = (n / 20).max(1);
    let max = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let edge = a.iter().enumerate().filter(|(i, _)| *i < band || *i >= n - band).map(|(_, z)| z.norm()).fold(0.0, f64::max);
    if max > 0.0 {
        edge / max
    } else {
        0.0
    }
}

fn spectral_tail(psi: &WaveFunction1D) -> f64 {
    let n = psi.amplitudes().len();
    let mut buf: Vec<Complex64> = psi.amplitudes().to_vec();
    rustfft::FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let total: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
    let high: f64 = buf
        .iter()
        .enumerate()
        .filter(|(m, _)| m.min(&(n - m)) > &(n / 4))
        .map(|(_, z)| z.norm_sqr())
        .sum();
    if total > 0.0 {
        high / total
    } else {
        0.0
    }
}

/// Distance between the kappa-Wigner function and classical Liouville flow
/// for each kappa, starting both from the minimum-spread Gaussian at
/// `kappa hbar` with the shape of `initial`.
pub fn contraction_experiment(
    potential: &PotentialSpec,
    kappa_values: &[f64],
    t_final: f64,
    initial: &PhaseSpaceGaussian,
    setup: &ContractionSetup,
) -> Result<Vec<ContractionRow>> {
    if kappa_values.is_empty() {
        return Err(KvnError::InvalidParameter("no kappa values".into()));
    }
    if kappa_values.iter().any(|k| !(*k > 0.0)) || kappa_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(KvnError::InvalidParameter("kappa values must be positive and strictly decreasing".into()));
    }
    if !(t_final > 0.0) {
        return Err(KvnError::InvalidParameter(format!("t_final must be positive, got {t_final}")));
    }
    let n_steps = (t_final / setup.dt).round().max(1.0) as usize;
    let dt = t_final / n_steps as f64;
    let mut rows = Vec::with_capacity(kappa_values.len());
    for &kappa in kappa_values {
        let hb = kappa * setup.hbar;
        let g = initial.minimum_spread(hb)?;
        let psi0 = WaveFunction1D::gaussian(setup.q, g.q0, g.p0, g.sigma_q, hb, setup.mass)?;
        let psi = evolve_schrodinger_kappa(&psi0, potential, dt, n_steps)?;
        let fine = evolve_schrodinger_kappa(&psi0, potential, 0.5 * dt, 2 * n_steps)?;
        let w = wigner_kappa(&psi, &setup.p, kappa)?;
        let w_fine = wigner_kappa(&fine, &setup.p, kappa)?;
        let classical = liouville_pullback(|q, p| g.density(q, p), potential, setup.mass, t_final, &setup.q, &setup.p, dt)?;
        let cl: Vec<f64> = classical.values.iter().copied().collect();
        let residual = two_point_residual(&psi0, potential, setup.dt_probe)?.max(two_point_residual(&psi, potential, setup.dt_probe)?);
        rows.push(ContractionRow {
            kappa,
            l1: l1(&w, &cl),
            dt_change: l1(&w, &w_fine.values.iter().copied().collect::<Vec<_>>()),
            spectral_tail: spectral_tail(&psi),
            two_point_residual: residual,
            classical_loss: (1.0 - classical.mass()).abs(),
            edge_amplitude: edge_amplitude(&psi),
        });
    }
    let clean = rows.iter().all(ContractionRow::converged);
    if setup.require_monotone && clean {
        if let Some(w) = rows.windows(2).find(|w| w[1].l1 >= w[0].l1) {
            return Err(KvnError::Experiment(format!(
                "L1 distance does not decrease from kappa = {} ({}) to kappa = {} ({})",
                w[0].kappa, w[0].l1, w[1].kappa, w[1].l1
            )));
        }
    }
    Ok(rows)
}

/// Numerical setup for [`two_slit_compare`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSlitSetup {
    pub kvn_q: Axis,
    pub kvn_p: Axis,
    pub quantum_q: Axis,
    pub units: UnitSystem,
    pub n_probes: usize,
}

impl Default for TwoSlitSetup {
    fn default() -> Self {
        Self {
            kvn_q: Axis::new(-6.0, 6.0, 512).expect("static axis"),
            kvn_p: Axis::centered(128, 0.05).expect("static axis"),
            quantum_q: Axis::new(-40.0, 40.0, 4096).expect("static axis"),
            units: UnitSystem::default(),
            n_probes: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSlitReport {
    pub probe_times: Vec<f64>,
    /// `max_q |rho_12 - rho_1 - rho_2|` of the KvN position marginals per probe.
    pub kvn_cross_terms: Vec<f64>,
    pub kvn_cross_term_max: f64,
    /// Fringe visibility of the quantum position density at `t_final`;
    /// zero when the central region has no interior minimum.
    pub quantum_fringe_visibility: f64,
    pub quantum_density: Vec<f64>,
}

fn marginal(state: &crate::state::KvnState) -> Vec<f64> {
    let dp = state.grid().d_dual();
    state.density().rows().into_iter().map(|r| r.sum() * dp).collect()
}

/// Central-fringe visibility `(max - min) / (max + min)` over
/// `|q| <= half_width`, using interior local minima only.
pub fn fringe_visibility(q: &Axis, density: &[f64], half_width: f64) -> f64 {
    let idx: Vec<usize> = (0..q.n).filter(|&i| q.point(i).abs() <= half_width).collect();
    if idx.len() < 3 {
        return 0.0;
    }
    let max = idx.iter().map(|&i| density[i]).fold(0.0, f64::max);
    let min = idx[1..idx.len() - 1]
        .iter()
        .filter(|&&i| density[i] < density[i - 1] && density[i] <= density[i + 1])
        .map(|&i| density[i])
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() || max + min <= 0.0 {
        0.0
    } else {
        (max - min) / (max + min)
    }
}

/// Two Gaussian slits at `±separation / 2` evolved freely as KvN states and
/// as a quantum superposition. `separation = 0` runs a single slit.
pub fn two_slit_compare(
    slit_separation: f64,
    slit_width: f64,
    momentum_spread: f64,
    t_final: f64,
    setup: &TwoSlitSetup,
) -> Result<TwoSlitReport> {
    if !(slit_width > 0.0 && momentum_spread > 0.0 && t_final > 0.0) {
        return Err(KvnError::InvalidParameter("slit width, momentum spread and t_final must be positive".into()));
    }
    let single = slit_separation == 0.0;
    if !single && slit_separation < 12.0 * slit_width {
        return Err(KvnError::InvalidParameter(format!(
            "slits at separation {slit_separation} overlap within 6 sigma (width {slit_width})"
        )));
    }
    let u = setup.units;
    let grid = GridSpec::new(setup.kvn_q, setup.kvn_p, u);
    let slit = |q0: f64| make_gaussian_state(&grid, Representation::PositionMomentum, &GaussianSpec::new(q0, 0.0, slit_width, momentum_spread), true);
    let a = slit(-0.5 * slit_separation)?;
    let b = if single { crate::state::KvnState::zeros(grid, Representation::PositionMomentum) } else { slit(0.5 * slit_separation)? };
    let both = a.plus(&b)?;

    let n_probes = setup.n_probes.max(2);
    let probe_times: Vec<f64> = (0..n_probes).map(|k| t_final * k as f64 / (n_probes - 1) as f64).collect();
    let mut kvn_cross_terms = Vec::with_capacity(n_probes);
    for &t in &probe_times {
        let (ra, rb, rab) = (
            marginal(&evolve_free_spectral(&a, t)?),
            marginal(&evolve_free_spectral(&b, t)?),
            marginal(&evolve_free_spectral(&both, t)?),
        );
        let cross = (0..ra.len()).map(|i| (rab[i] - ra[i] - rb[i]).abs()).fold(0.0, f64::max);
        kvn_cross_terms.push(cross);
    }
    let kvn_cross_term_max = kvn_cross_terms.iter().copied().fold(0.0, f64::max);

    let qa = setup.quantum_q;
    let ga = WaveFunction1D::gaussian(qa, -0.5 * slit_separation, 0.0, slit_width, u.hbar, u.mass)?;
    let amps: Array1<Complex64> = if single {
        ga.amplitudes().clone()
    } else {
        let gb = WaveFunction1D::gaussian(qa, 0.5 * slit_separation, 0.0, slit_width, u.hbar, u.mass)?;
        ga.amplitudes() + gb.amplitudes()
    };
    let psi = ga.with_amplitudes(amps, 0.0)?;
    let psi = psi.with_amplitudes(psi.amplitudes() / Complex64::new(psi.norm(), 0.0), 0.0)?;
    let out = evolve_schrodinger_kappa(&psi, &PotentialSpec::free(), t_final, 1)?;
    let density = out.density();
    let quantum_fringe_visibility = if single {
        0.0
    } else {
        let spacing = 2.0 * std::f64::consts::PI * u.hbar * t_final / (u.mass * slit_separation);
        fringe_visibility(&qa, &density, spacing)
    };
    Ok(TwoSlitReport {
        probe_times,
        kvn_cross_terms,
        kvn_cross_term_max,
        quantum_fringe_visibility,
        quantum_density: density,
    })
}
