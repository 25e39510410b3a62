//! Uniform grids and the unit system.
//!
//! Every axis is a periodic-cell axis: `n` points starting at `min` with
//! spacing `(max - min) / n`, so `max` itself is the first periodic image and
//! is not stored. Dual axes (momentum `p` or the hidden coordinate `Q`) are
//! centred, `min = -max`, which puts the origin on index `n / 2` and makes the
//! parity map `j -> (n - j) mod n` an exact index reversal.

use std::f64::consts::PI;

use crate::error::{KvnError, Result};

/// Physical constants entering the dynamics. Natural units by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

impl UnitSystem {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(KvnError::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(KvnError::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        Ok(Self { hbar, mass })
    }
}

/// One uniform axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || max <= min {
            return Err(KvnError::InvalidGrid(format!("axis needs max > min, got [{min}, {max})")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(KvnError::InvalidGrid(format!("axis length must be even and >= 8, got {n}")));
        }
        Ok(Self { min, max, n })
    }

    /// Centred axis of `n` points with the given spacing.
    pub fn centered(n: usize, spacing: f64) -> Result<Self> {
        let half = 0.5 * n as f64 * spacing;
        Self::new(-half, half, n)
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / self.n as f64
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub fn extent(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    pub fn is_symmetric(&self) -> bool {
        (self.min + self.max).abs() <= 1e-12 * self.max.abs().max(1.0)
    }

    /// Index of the mirror point `-x_j`, valid on centred axes.
    #[inline]
    pub fn mirror_index(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }

    /// Index of the grid point nearest to `x`, if `x` lies on the axis.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        let f = (x - self.min) / self.spacing();
        let i = f.round();
        if i < 0.0 || i >= self.n as f64 {
            None
        } else {
            Some(i as usize)
        }
    }

    /// Angular wavenumbers in FFT order (index 0 is the zero mode).
    pub fn fft_wavenumbers(&self) -> Vec<f64> {
        let n = self.n;
        let dk = 2.0 * PI / self.extent();
        (0..n)
            .map(|k| {
                let m = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                m * dk
            })
            .collect()
    }

    /// Wavenumbers for first-derivative operators: the Nyquist mode is zeroed
    /// so that the derivative of a real field stays real.
    pub fn derivative_wavenumbers(&self) -> Vec<f64> {
        let mut k = self.fft_wavenumbers();
        k[self.n / 2] = 0.0;
        k
    }

    /// Largest representable angular wavenumber.
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    /// The Fourier-conjugate centred axis: spacing `2 pi scale / (n d)`.
    pub fn conjugate(&self, scale: f64) -> Result<Self> {
        Self::centered(self.n, 2.0 * PI * scale / (self.n as f64 * self.spacing()))
    }
}

/// Rectangular phase-space grid: a position axis and a dual axis whose meaning
/// (momentum or hidden coordinate) is set by the state's representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub q: Axis,
    pub dual: Axis,
    pub units: UnitSystem,
}

impl GridSpec {
    pub fn new(q: Axis, dual: Axis, units: UnitSystem) -> Self {
        Self { q, dual, units }
    }

    /// Builds a grid from raw extents.
    pub fn from_extents(
        q_min: f64,
        q_max: f64,
        n_q: usize,
        dual_min: f64,
        dual_max: f64,
        n_dual: usize,
        units: UnitSystem,
    ) -> Result<Self> {
        Ok(Self {
            q: Axis::new(q_min, q_max, n_q)?,
            dual: Axis::new(dual_min, dual_max, n_dual)?,
            units,
        })
    }

    /// Wall-aligned box grid on the doubled domain `[-L, L)`, dual axis in the
    /// hidden coordinate `Q`: `Q` in `[-10 pi, 10 pi)` so that `kappa` sits on
    /// a lattice of spacing 0.1 and the momentum spacing is `0.1 hbar`.
    pub fn default_box(length: f64, units: UnitSystem) -> Result<Self> {
        Ok(Self {
            q: Axis::new(-length, length, 256)?,
            dual: Axis::new(-10.0 * PI, 10.0 * PI, 256)?,
            units,
        })
    }

    pub fn dq(&self) -> f64 {
        self.q.spacing()
    }

    pub fn d_dual(&self) -> f64 {
        self.dual.spacing()
    }

    pub fn cell(&self) -> f64 {
        self.dq() * self.d_dual()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.q.n, self.dual.n)
    }

    /// The same grid with its dual axis replaced by the conjugate axis.
    pub fn conjugate_dual(&self) -> Result<Self> {
        if !self.dual.is_symmetric() {
            return Err(KvnError::InvalidGrid(format!(
                "dual axis must be symmetric about 0, got [{}, {})",
                self.dual.min, self.dual.max
            )));
        }
        Ok(Self {
            q: self.q,
            dual: self.dual.conjugate(self.units.hbar)?,
            units: self.units,
        })
    }

    /// True when both grids share axes and constants to rounding.
    pub fn compatible(&self, other: &GridSpec) -> bool {
        fn close(a: f64, b: f64) -> bool {
            (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
        }
        let axis = |a: &Axis, b: &Axis| a.n == b.n && close(a.min, b.min) && close(a.max, b.max);
        axis(&self.q, &other.q)
            && axis(&self.dual, &other.dual)
            && close(self.units.hbar, other.units.hbar)
            && close(self.units.mass, other.units.mass)
    }
}
