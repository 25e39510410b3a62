//! Phase-space amplitudes in either representation.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{KvnError, Result};
use crate::grid::GridSpec;

/// Which pair of coordinates the amplitude field is sampled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// `psi(q, p)`: position and momentum act by multiplication.
    PositionMomentum,
    /// `psi(q, Q)`: reached by Fourier transforming in `p`.
    PositionDual,
}

/// A complex amplitude on a phase-space grid. Immutable once built; the
/// constructor rejects shape mismatches and non-finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct KvnState {
    grid: GridSpec,
    rep: Representation,
    amplitudes: Array2<Complex64>,
    time: f64,
}

impl KvnState {
    pub fn new(grid: GridSpec, rep: Representation, amplitudes: Array2<Complex64>, time: f64) -> Result<Self> {
        if amplitudes.dim() != grid.shape() {
            return Err(KvnError::GridMismatch(format!(
                "amplitude shape {:?} does not match grid {:?}",
                amplitudes.dim(),
                grid.shape()
            )));
        }
        if let Some(((i, j), _)) = amplitudes.indexed_iter().find(|(_, z)| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(KvnError::NonFinite(format!("amplitude at index ({i}, {j})")));
        }
        if !time.is_finite() {
            return Err(KvnError::NonFinite("state time".into()));
        }
        Ok(Self { grid, rep, amplitudes, time })
    }

    pub fn zeros(grid: GridSpec, rep: Representation) -> Self {
        Self {
            grid,
            rep,
            amplitudes: Array2::zeros(grid.shape()),
            time: 0.0,
        }
    }

    /// Samples `f(q, dual)` on the grid.
    pub fn from_fn<F>(grid: GridSpec, rep: Representation, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        let amps = Array2::from_shape_fn(grid.shape(), |(i, j)| f(grid.q.point(i), grid.dual.point(j)));
        Self::new(grid, rep, amps, 0.0)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.rep
    }

    pub fn amplitudes(&self) -> &Array2<Complex64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Array2<Complex64> {
        self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Same grid and representation, new field and time.
    pub fn with_amplitudes(&self, amplitudes: Array2<Complex64>, time: f64) -> Result<Self> {
        Self::new(self.grid, self.rep, amplitudes, time)
    }

    pub fn require(&self, rep: Representation) -> Result<()> {
        if self.rep != rep {
            return Err(KvnError::WrongRepresentation {
                expected: rep,
                found: self.rep,
            });
        }
        Ok(())
    }

    /// `|psi|^2` on the grid.
    pub fn density(&self) -> Array2<f64> {
        self.amplitudes.mapv(|z| z.norm_sqr())
    }

    /// Grid quadrature of `|psi|^2` with cell measure `dq * d_dual`, square-rooted.
    pub fn norm(&self) -> f64 {
        let sum: f64 = self.amplitudes.iter().map(|z| z.norm_sqr()).sum();
        (sum * self.grid.cell()).sqrt()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &KvnState) -> Result<Complex64> {
        self.check_compatible(other)?;
        let sum: Complex64 = self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.grid.cell())
    }

    pub fn check_compatible(&self, other: &KvnState) -> Result<()> {
        if self.rep != other.rep {
            return Err(KvnError::WrongRepresentation {
                expected: self.rep,
                found: other.rep,
            });
        }
        if !self.grid.compatible(&other.grid) {
            return Err(KvnError::GridMismatch("states live on different grids".into()));
        }
        Ok(())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            amplitudes: self.amplitudes.mapv(|z| z * c),
            ..self.clone()
        }
    }

    pub fn plus(&self, other: &KvnState) -> Result<Self> {
        self.check_compatible(other)?;
        self.with_amplitudes(&self.amplitudes + &other.amplitudes, self.time)
    }

    /// Rescaled to unit norm; errors on the zero state.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(KvnError::InvalidParameter("cannot normalise the zero state".into()));
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    /// Multiplies by `exp(i chi(q, dual))`.
    pub fn rephased<F>(&self, chi: F) -> Self
    where
        F: Fn(f64, f64) -> f64,
    {
        let g = self.grid;
        let amps = Array2::from_shape_fn(g.shape(), |(i, j)| {
            self.amplitudes[[i, j]] * Complex64::cis(chi(g.q.point(i), g.dual.point(j)))
        });
        Self { amplitudes: amps, ..self.clone() }
    }

    /// Largest pointwise difference between two states on the same grid.
    pub fn max_abs_diff(&self, other: &KvnState) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_amplitude(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Product Gaussian in `(q, dual)`. Widths are standard deviations of the
/// density `|psi|^2`, so the amplitude falls as `exp(-(x - x0)^2 / (4 w^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec {
    pub center_q: f64,
    pub center_dual: f64,
    pub width_q: f64,
    pub width_dual: f64,
}

impl GaussianSpec {
    pub fn new(center_q: f64, center_dual: f64, width_q: f64, width_dual: f64) -> Self {
        Self {
            center_q,
            center_dual,
            width_q,
            width_dual,
        }
    }

    /// Continuum-normalised amplitude.
    pub fn amplitude(&self, q: f64, dual: f64) -> f64 {
        gauss_amp(q - self.center_q, self.width_q) * gauss_amp(dual - self.center_dual, self.width_dual)
    }

    pub fn density(&self, q: f64, dual: f64) -> f64 {
        self.amplitude(q, dual).powi(2)
    }
}

fn gauss_amp(x: f64, w: f64) -> f64 {
    (2.0 * std::f64::consts::PI * w * w).powf(-0.25) * (-x * x / (4.0 * w * w)).exp()
}

/// Samples a product Gaussian on the grid.
///
/// Rejects centres outside the grid and widths below three grid spacings.
/// With `normalize` the result has unit grid norm; otherwise it carries the
/// continuum normalisation.
pub fn make_gaussian_state(
    grid: &GridSpec,
    rep: Representation,
    spec: &GaussianSpec,
    normalize: bool,
) -> Result<KvnState> {
    if !(spec.width_q > 0.0 && spec.width_dual > 0.0) {
        return Err(KvnError::InvalidParameter("Gaussian widths must be positive".into()));
    }
    if !grid.q.contains(spec.center_q) {
        return Err(KvnError::OutsideGrid(format!("center_q = {}", spec.center_q)));
    }
    if !grid.dual.contains(spec.center_dual) {
        return Err(KvnError::OutsideGrid(format!("center_dual = {}", spec.center_dual)));
    }
    if spec.width_q < 3.0 * grid.dq() {
        return Err(KvnError::Unresolved(format!(
            "width_q = {} is below three spacings ({})",
            spec.width_q,
            3.0 * grid.dq()
        )));
    }
    if spec.width_dual < 3.0 * grid.d_dual() {
        return Err(KvnError::Unresolved(format!(
            "width_dual = {} is below three spacings ({})",
            spec.width_dual,
            3.0 * grid.d_dual()
        )));
    }
    let state = KvnState::from_fn(*grid, rep, |q, x| Complex64::new(spec.amplitude(q, x), 0.0))?;
    if normalize {
        state.normalized()
    } else {
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Axis, UnitSystem};

    fn grid() -> GridSpec {
        GridSpec::new(
            Axis::new(-2.0, 2.0, 128).unwrap(),
            Axis::new(-2.0, 2.0, 128).unwrap(),
            UnitSystem::default(),
        )
    }

    #[test]
    fn normalized_gaussian_has_unit_norm() {
        let s = make_gaussian_state(
            &grid(),
            Representation::PositionMomentum,
            &GaussianSpec::new(0.0, 0.0, 0.1, 0.1),
            true,
        )
        .unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_gaussians_have_vanishing_overlap() {
        let g = grid();
        let a = make_gaussian_state(&g, Representation::PositionMomentum, &GaussianSpec::new(-1.0, 0.0, 0.1, 0.1), true)
            .unwrap();
        let b = make_gaussian_state(&g, Representation::PositionMomentum, &GaussianSpec::new(1.0, 0.0, 0.1, 0.1), true)
            .unwrap();
        let prod = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x * y).norm())
            .fold(0.0, f64::max);
        assert!(prod <= 1e-12);
        assert!(a.inner(&b).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn rejects_bad_centres_and_widths() {
        let g = grid();
        let rep = Representation::PositionMomentum;
        assert!(matches!(
            make_gaussian_state(&g, rep, &GaussianSpec::new(3.0, 0.0, 0.1, 0.1), true),
            Err(KvnError::OutsideGrid(_))
        ));
        assert!(matches!(
            make_gaussian_state(&g, rep, &GaussianSpec::new(0.0, 0.0, 0.05, 0.1), true),
            Err(KvnError::Unresolved(_))
        ));
        assert!(make_gaussian_state(&g, rep, &GaussianSpec::new(0.0, 0.0, -0.1, 0.1), true).is_err());
    }

    #[test]
    fn norm_basics() {
        let g = grid();
        assert_eq!(KvnState::zeros(g, Representation::PositionMomentum).norm(), 0.0);
        let s = make_gaussian_state(&g, Representation::PositionMomentum, &GaussianSpec::new(0.3, -0.2, 0.2, 0.15), true)
            .unwrap();
        let d = s.scaled(Complex64::new(2.0, 0.0));
        assert!((d.norm() - 2.0).abs() < 1e-12);
        let ii = s.inner(&s).unwrap();
        assert!((ii.re - s.norm().powi(2)).abs() < 1e-12 && ii.im.abs() < 1e-15);
    }

    #[test]
    fn inner_rejects_mismatch() {
        let g = grid();
        let a = KvnState::zeros(g, Representation::PositionMomentum);
        let b = KvnState::zeros(g, Representation::PositionDual);
        assert!(a.inner(&b).is_err());
        let g2 = GridSpec::new(Axis::new(-1.0, 1.0, 128).unwrap(), g.dual, g.units);
        let c = KvnState::zeros(g2, Representation::PositionMomentum);
        assert!(a.inner(&c).is_err());
    }

    #[test]
    fn construction_rejects_nan() {
        let g = grid();
        let mut amps = Array2::zeros(g.shape());
        amps[[3, 4]] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            KvnState::new(g, Representation::PositionMomentum, amps, 0.0),
            Err(KvnError::NonFinite(_))
        ));
    }
}
