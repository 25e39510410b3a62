use std::f64::consts::PI;

use ndarray::Array1;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{KvnError, Result};
use crate::evolution::PotentialSpec;
use crate::grid::Axis;

/// A 1-D wavefunction evolving under `i hbar_eff dPsi/dt = H Psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction1D {
    axis: Axis,
    amplitudes: Array1<Complex64>,
    hbar_eff: f64,
    mass: f64,
    time: f64,
}

impl WaveFunction1D {
    pub fn new(axis: Axis, amplitudes: Array1<Complex64>, hbar_eff: f64, mass: f64) -> Result<Self> {
        if amplitudes.len() != axis.n {
            return Err(KvnError::GridMismatch(format!(
                "{} amplitudes for {} grid points",
                amplitudes.len(),
                axis.n
            )));
        }
        if !(hbar_eff > 0.0 && hbar_eff.is_finite()) {
            return Err(KvnError::InvalidParameter(format!("effective hbar must be positive, got {hbar_eff}")));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(KvnError::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(KvnError::NonFinite("wavefunction amplitudes".into()));
        }
        Ok(Self {
            axis,
            amplitudes,
            hbar_eff,
            mass,
            time: 0.0,
        })
    }

    /// Minimum-uncertainty packet with position-density width `sigma_q`:
    /// `(2 pi sigma^2)^(-1/4) exp(-(q - q0)^2 / (4 sigma^2) + i p0 q / hbar_eff)`.
    pub fn gaussian(axis: Axis, q0: f64, p0: f64, sigma_q: f64, hbar_eff: f64, mass: f64) -> Result<Self> {
        if !(sigma_q > 0.0) {
            return Err(KvnError::InvalidParameter(format!("sigma_q must be positive, got {sigma_q}")));
        }
        let pre = (2.0 * PI * sigma_q * sigma_q).powf(-0.25);
        let amps = Array1::from_iter(axis.points().into_iter().map(|q| {
            let x = q - q0;
            Complex64::from_polar(pre * (-x * x / (4.0 * sigma_q * sigma_q)).exp(), p0 * q / hbar_eff)
        }));
        Self::new(axis, amps, hbar_eff, mass)
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amplitudes
    }

    pub fn hbar_eff(&self) -> f64 {
        self.hbar_eff
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_amplitudes(&self, amplitudes: Array1<Complex64>, time: f64) -> Result<Self> {
        let mut out = Self::new(self.axis, amplitudes, self.hbar_eff, self.mass)?;
        out.time = time;
        Ok(out)
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        (self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.axis.spacing()).sqrt()
    }

    pub fn inner(&self, other: &WaveFunction1D) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.axis.spacing()
    }

    /// `(<q>, <p>)`, with `p = -i hbar_eff d/dq` applied spectrally.
    pub fn moments(&self) -> (f64, f64) {
        let dq = self.axis.spacing();
        let q: f64 = self
            .amplitudes
            .iter()
            .zip(self.axis.points())
            .map(|(z, x)| x * z.norm_sqr())
            .sum::<f64>()
            * dq;
        let k = self.axis.derivative_wavenumbers();
        let d = spectral_apply(&self.amplitudes, |m| Complex64::new(self.hbar_eff * k[m], 0.0));
        let p: Complex64 = self.amplitudes.iter().zip(d.iter()).map(|(a, b)| a.conj() * b).sum();
        (q, p.re * dq)
    }

    /// `H Psi` with the kinetic term applied spectrally.
    pub fn apply_hamiltonian(&self, potential: &PotentialSpec) -> Array1<Complex64> {
        let k = self.axis.fft_wavenumbers();
        let c = self.hbar_eff * self.hbar_eff / (2.0 * self.mass);
        let kin = spectral_apply(&self.amplitudes, |m| Complex64::new(c * k[m] * k[m], 0.0));
        let qs = self.axis.points();
        Array1::from_iter(
            kin.iter()
                .zip(self.amplitudes.iter())
                .zip(qs)
                .map(|((t, z), q)| t + z * potential.v(q)),
        )
    }
}

/// FFT, multiply mode `m` by `f(m)`, inverse FFT.
pub(crate) fn spectral_apply<F: Fn(usize) -> Complex64>(v: &Array1<Complex64>, f: F) -> Array1<Complex64> {
    let n = v.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = v.to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    for (m, z) in buf.iter_mut().enumerate() {
        *z *= f(m) / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    Array1::from_vec(buf)
}

/// Strang steps of signed length `dt`; Nyquist checks are the caller's job.
pub(crate) fn strang_steps(psi: &WaveFunction1D, potential: &PotentialSpec, dt: f64, n_steps: usize) -> Result<WaveFunction1D> {
    let n = psi.axis.n;
    let hb = psi.hbar_eff;
    let k = psi.axis.fft_wavenumbers();
    let kinetic: Vec<Complex64> = k
        .iter()
        .map(|k| Complex64::cis(-hb * k * k * dt / (2.0 * psi.mass)) / n as f64)
        .collect();
    let v = potential.sample(&psi.axis.points());
    let half: Vec<Complex64> = v.iter().map(|v| Complex64::cis(-v * dt / (2.0 * hb))).collect();
    let full: Vec<Complex64> = half.iter().map(|z| z * z).collect();

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = psi.amplitudes.iter().zip(&half).map(|(a, h)| a * h).collect();
    for step in 0..n_steps {
        fwd.process(&mut buf);
        buf.iter_mut().zip(&kinetic).for_each(|(z, m)| *z *= m);
        inv.process(&mut buf);
        let phase = if step + 1 < n_steps { &full } else { &half };
        buf.iter_mut().zip(phase).for_each(|(z, m)| *z *= m);
    }
    if n_steps == 0 {
        buf = psi.amplitudes.to_vec();
    }
    if buf.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(KvnError::NonFinite("Schrodinger amplitudes diverged".into()));
    }
    psi.with_amplitudes(Array1::from_vec(buf), psi.time + dt * n_steps as f64)
}

/// Relative amplitude below which grid points and modes count as unoccupied.
const OCCUPIED: f64 = 1e-10;

/// Checks the per-step potential phase over the occupied support and the
/// kinetic phase over the occupied spectrum against `pi`. Free flight is exact
/// for any step, so the kinetic check only applies to non-constant potentials.
pub(crate) fn check_phases(psi: &WaveFunction1D, potential: &PotentialSpec, dt: f64) -> Result<()> {
    if potential.is_free() {
        return Ok(());
    }
    let amax = psi.amplitudes.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if amax == 0.0 {
        return Ok(());
    }
    let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (z, q) in psi.amplitudes.iter().zip(psi.axis.points()) {
        if z.norm() > OCCUPIED * amax {
            let v = potential.v(q);
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
    }
    let pot = (vmax - vmin) * dt.abs() / psi.hbar_eff;
    if pot > PI {
        return Err(KvnError::Nyquist(format!("potential phase per step {pot:.3} exceeds pi")));
    }
    let mut buf: Vec<Complex64> = psi.amplitudes.to_vec();
    FftPlanner::<f64>::new().plan_fft_forward(buf.len()).process(&mut buf);
    let smax = buf.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let k = psi.axis.fft_wavenumbers();
    let kmax = buf
        .iter()
        .zip(&k)
        .filter(|(z, _)| z.norm() > OCCUPIED * smax)
        .fold(0.0f64, |m, (_, k)| m.max(k.abs()));
    let kin = psi.hbar_eff * kmax * kmax * dt.abs() / (2.0 * psi.mass);
    if kin > PI {
        return Err(KvnError::Nyquist(format!("kinetic phase per step {kin:.3} exceeds pi")));
    }
    Ok(())
}

/// Strang split-step for `i hbar_eff dPsi/dt = [-(hbar_eff^2 / 2m) d^2/dq^2 + V] Psi`.
pub fn evolve_schrodinger_kappa(
    psi: &WaveFunction1D,
    potential: &PotentialSpec,
    dt: f64,
    n_steps: usize,
) -> Result<WaveFunction1D> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(KvnError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    check_phases(psi, potential, dt)?;
    strang_steps(psi, potential, dt, n_steps)
}
