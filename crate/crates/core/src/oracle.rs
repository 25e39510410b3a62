//! Brute-force classical reference: trajectory ensembles under Hamilton's
//! equations, histogram density estimates and comparison metrics.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::boundary::fold_billiard;
use crate::error::{KvnError, Result};
use crate::evolution::PotentialSpec;
use crate::grid::Axis;
use crate::state::{KvnState, Representation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub q: f64,
    pub p: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEnsemble {
    pub samples: Vec<Sample>,
    pub time: f64,
    pub seed: u64,
}

impl ClassicalEnsemble {
    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }

    /// `(<q>, <p>)` under the sample weights.
    pub fn means(&self) -> (f64, f64) {
        let w = self.total_weight();
        let q = self.samples.iter().map(|s| s.weight * s.q).sum::<f64>() / w;
        let p = self.samples.iter().map(|s| s.weight * s.p).sum::<f64>() / w;
        (q, p)
    }

    /// Doubled-domain image for box comparisons: every sample and its mirror
    /// `(-q, -p)`, each at half weight.
    pub fn mirrored(&self) -> ClassicalEnsemble {
        let samples = self
            .samples
            .iter()
            .flat_map(|s| {
                let h = 0.5 * s.weight;
                [Sample { q: s.q, p: s.p, weight: h }, Sample { q: -s.q, p: -s.p, weight: h }]
            })
            .collect();
        ClassicalEnsemble {
            samples,
            time: self.time,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ScenarioKind {
    Free,
    /// Elastic walls at `q = 0` and `q = L`.
    Box(f64),
    /// `V = m g q`.
    Gravity(f64),
    Potential(PotentialSpec),
}

/// Nonnegative density per unit phase-space area on grid points `(q_i, p_j)`;
/// each point owns the cell of one spacing centred on it.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub q: Axis,
    pub p: Axis,
    pub values: Array2<f64>,
}

impl DensityField {
    pub fn new(q: Axis, p: Axis, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (q.n, p.n) {
            return Err(KvnError::GridMismatch(format!(
                "field shape {:?} does not match axes ({}, {})",
                values.dim(),
                q.n,
                p.n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(KvnError::NonFinite("density field".into()));
        }
        Ok(Self { q, p, values })
    }

    /// `|psi|^2` of a `(q, p)` state.
    pub fn from_state(state: &KvnState) -> Result<Self> {
        state.require(Representation::PositionMomentum)?;
        let g = state.grid();
        Self::new(g.q, g.dual, state.density())
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(q: Axis, p: Axis, f: F) -> Result<Self> {
        Self::new(q, p, Array2::from_shape_fn((q.n, p.n), |(i, j)| f(q.point(i), p.point(j))))
    }

    pub fn cell(&self) -> f64 {
        self.q.spacing() * self.p.spacing()
    }

    pub fn mass(&self) -> f64 {
        self.values.sum() * self.cell()
    }
}

/// Draws `n` equal-weight samples from a density field: a cell is picked by
/// its mass, then a point uniformly inside it. Sample `i` uses its own ChaCha
/// stream `i` under the master seed, so the result does not depend on thread
/// scheduling.
pub fn sample_ensemble(density: &DensityField, n: usize, seed: u64) -> Result<ClassicalEnsemble> {
    if n == 0 {
        return Err(KvnError::InvalidParameter("n_samples must be at least 1".into()));
    }
    if density.values.iter().any(|&v| v < 0.0) {
        return Err(KvnError::InvalidParameter("density has negative entries".into()));
    }
    let mut cdf = Vec::with_capacity(density.values.len());
    let mut acc = 0.0;
    for v in density.values.iter() {
        acc += v;
        cdf.push(acc);
    }
    if !(acc > 0.0) {
        return Err(KvnError::EmptyDensity);
    }
    let (dq, dp) = (density.q.spacing(), density.p.spacing());
    let np = density.p.n;
    let w = 1.0 / n as f64;
    let samples = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let u: f64 = rng.random::<f64>() * acc;
            let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            let (ci, cj) = (k / np, k % np);
            let q = density.q.point(ci) + (rng.random::<f64>() - 0.5) * dq;
            let p = density.p.point(cj) + (rng.random::<f64>() - 0.5) * dp;
            Sample { q, p, weight: w }
        })
        .collect();
    Ok(ClassicalEnsemble {
        samples,
        time: 0.0,
        seed,
    })
}

/// One trajectory of `H = p^2 / 2m + V` by kick-drift-kick leapfrog over
/// `n` equal steps spanning `t` (which may be negative).
pub fn leapfrog(q: f64, p: f64, potential: &PotentialSpec, mass: f64, t: f64, n: usize) -> (f64, f64) {
    let h = t / n as f64;
    let (mut q, mut p) = (q, p);
    p -= 0.5 * h * potential.v_prime(q);
    for step in 0..n {
        q += h * p / mass;
        let f = potential.v_prime(q);
        p -= if step + 1 < n { h * f } else { 0.5 * h * f };
    }
    (q, p)
}

fn leapfrog_steps(t: f64, dt: f64) -> usize {
    ((t.abs() / dt).ceil() as usize).max(1)
}

/// Advances every sample by `t`. Free, Box and Gravity are exact; Potential
/// uses leapfrog with step at most `dt`.
pub fn integrate_hamilton(
    ensemble: &ClassicalEnsemble,
    t: f64,
    scenario: &ScenarioKind,
    mass: f64,
    dt: Option<f64>,
) -> Result<ClassicalEnsemble> {
    if !(mass > 0.0) {
        return Err(KvnError::InvalidParameter(format!("mass must be positive, got {mass}")));
    }
    let map: Box<dyn Fn(f64, f64) -> (f64, f64) + Sync> = match scenario {
        ScenarioKind::Free => Box::new(move |q, p| (q + p * t / mass, p)),
        ScenarioKind::Gravity(g) => {
            let g = *g;
            Box::new(move |q, p| (q + p * t / mass - 0.5 * g * t * t, p - mass * g * t))
        }
        ScenarioKind::Box(length) => {
            let l = *length;
            if !(l > 0.0) {
                return Err(KvnError::InvalidParameter(format!("box length must be positive, got {l}")));
            }
            if let Some(s) = ensemble.samples.iter().find(|s| s.q < 0.0 || s.q > l) {
                return Err(KvnError::OutsideGrid(format!("sample at q = {} is outside [0, {l}]", s.q)));
            }
            Box::new(move |q, p| {
                let (qs, sign) = fold_billiard(q + p * t / mass, l);
                (qs, sign * p)
            })
        }
        ScenarioKind::Potential(v) => {
            let dt = dt.ok_or_else(|| KvnError::InvalidParameter("Potential scenario needs a time step".into()))?;
            if !(dt > 0.0) {
                return Err(KvnError::InvalidParameter(format!("dt must be positive, got {dt}")));
            }
            let v = v.clone();
            let n = leapfrog_steps(t, dt);
            Box::new(move |q, p| leapfrog(q, p, &v, mass, t, n))
        }
    };
    let samples = ensemble
        .samples
        .par_iter()
        .map(|s| {
            let (q, p) = map(s.q, s.p);
            Sample { q, p, weight: s.weight }
        })
        .collect();
    Ok(ClassicalEnsemble {
        samples,
        time: ensemble.time + t,
        seed: ensemble.seed,
    })
}

/// Histogram estimate together with the weight that fell outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub field: DensityField,
    pub out_of_range: f64,
    pub n_samples: usize,
}

impl DensityEstimate {
    pub fn occupied_cells(&self) -> usize {
        self.field.values.iter().filter(|&&v| v > 0.0).count()
    }
}

/// Cell-integrated histogram normalised to unit total sample weight, so the
/// field's mass is `1 - out_of_range`. With `wrap_q` the q coordinate is
/// taken modulo the axis extent (periodic doubled box grids).
pub fn density_estimate(ensemble: &ClassicalEnsemble, q: &Axis, p: &Axis, wrap_q: bool) -> DensityEstimate {
    let (dq, dp) = (q.spacing(), p.spacing());
    let total = ensemble.total_weight();
    let mut values = Array2::<f64>::zeros((q.n, p.n));
    let mut outside = 0.0;
    let index = |x: f64, ax: &Axis, wrap: bool| -> Option<usize> {
        let r = ((x - ax.min) / ax.spacing()).round();
        let r = if wrap { r.rem_euclid(ax.n as f64) } else { r };
        (r >= 0.0 && r < ax.n as f64).then_some(r as usize)
    };
    for s in &ensemble.samples {
        match (index(s.q, q, wrap_q), index(s.p, p, false)) {
            (Some(i), Some(j)) => values[[i, j]] += s.weight,
            _ => outside += s.weight,
        }
    }
    let scale = if total > 0.0 { 1.0 / (total * dq * dp) } else { 0.0 };
    values.mapv_inplace(|v| v * scale);
    DensityEstimate {
        field: DensityField { q: *q, p: *p, values },
        out_of_range: if total > 0.0 { outside / total } else { 0.0 },
        n_samples: ensemble.samples.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    /// `sum |a - b| dq dp`
    pub l1: f64,
    /// `max |a - b| / max |b|`, or the absolute maximum when `b` vanishes
    pub linf: f64,
    pub linf_absolute: bool,
}

pub fn compare_densities(a: &DensityField, b: &DensityField) -> Result<Comparison> {
    if a.q != b.q || a.p != b.p {
        return Err(KvnError::GridMismatch("density fields live on different grids".into()));
    }
    let l1 = a.values.iter().zip(b.values.iter()).map(|(x, y)| (x - y).abs()).sum::<f64>() * a.cell();
    let diff = a.values.iter().zip(b.values.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let bmax = b.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (linf, linf_absolute) = if bmax > 0.0 { (diff / bmax, false) } else { (diff, true) };
    Ok(Comparison { l1, linf, linf_absolute })
}

/// L1 tolerance for a histogram of `n` samples over `occupied` cells:
/// `5 sqrt(occupied / n)`. Per cell the counting error is about
/// `sqrt(p_c / n)`, and by Cauchy-Schwarz the sum over cells is at most
/// `sqrt(occupied / n)`.
pub fn monte_carlo_budget(estimate: &DensityEstimate) -> f64 {
    5.0 * (estimate.occupied_cells() as f64 / estimate.n_samples.max(1) as f64).sqrt()
}

/// Classical density at time `t` on a grid, obtained by pulling each grid
/// point back along the Hamiltonian flow and evaluating `initial` there.
pub fn liouville_pullback<F>(
    initial: F,
    potential: &PotentialSpec,
    mass: f64,
    t: f64,
    q: &Axis,
    p: &Axis,
    dt: f64,
) -> Result<DensityField>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if !(dt > 0.0) {
        return Err(KvnError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let n = leapfrog_steps(t, dt);
    let mut values = Array2::<f64>::zeros((q.n, p.n));
    values
        .axis_iter_mut(ndarray::Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            for (j, v) in row.iter_mut().enumerate() {
                let (q0, p0) = leapfrog(q.point(i), p.point(j), potential, mass, -t, n);
                *v = initial(q0, p0);
            }
        });
    DensityField::new(*q, *p, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_of_single_sample() {
        let ax = Axis::centered(8, 0.5).unwrap();
        let e = ClassicalEnsemble {
            samples: vec![Sample { q: 0.1, p: -0.6, weight: 1.0 }],
            time: 0.0,
            seed: 0,
        };
        let d = density_estimate(&e, &ax, &ax, false);
        assert_eq!(d.occupied_cells(), 1);
        assert!((d.field.mass() - 1.0).abs() < 1e-15);
        assert_eq!(d.out_of_range, 0.0);
    }

    #[test]
    fn degenerate_comparison_is_flagged() {
        let ax = Axis::centered(8, 0.5).unwrap();
        let a = DensityField::from_fn(ax, ax, |q, _| q * q).unwrap();
        let z = DensityField::from_fn(ax, ax, |_, _| 0.0).unwrap();
        let c = compare_densities(&a, &a).unwrap();
        assert_eq!((c.l1, c.linf), (0.0, 0.0));
        assert!(compare_densities(&a, &z).unwrap().linf_absolute);
    }
}
