//! FFT plumbing shared by the transforms, propagators and derivative
//! operators. Fields are row-major `(n_q, n_dual)` arrays; axis 0 is `q`.

use ndarray::{Array2, Axis as NdAxis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

/// Which grid direction a 1-D operation runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Position,
    Dual,
}

impl Direction {
    fn nd(self) -> NdAxis {
        match self {
            Direction::Position => NdAxis(0),
            Direction::Dual => NdAxis(1),
        }
    }
}

/// In-place FFT of every lane along `dir`. The inverse is scaled by `1/n`.
pub fn fft_lanes(field: &mut Array2<Complex64>, dir: Direction, inverse: bool) {
    let n = field.len_of(dir.nd());
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let scale = if inverse { 1.0 / n as f64 } else { 1.0 };
    // iterating along the orthogonal axis yields the lanes to transform
    let other = match dir {
        Direction::Position => NdAxis(1),
        Direction::Dual => NdAxis(0),
    };
    field.axis_iter_mut(other).into_par_iter().for_each(|mut lane| {
        let mut buf: Vec<Complex64> = lane.iter().copied().collect();
        plan.process(&mut buf);
        for (dst, src) in lane.iter_mut().zip(buf) {
            *dst = src * scale;
        }
    });
}

/// FFT along `dir`, multiply mode `m` by `mult[m]`, inverse FFT.
pub fn apply_lane_multiplier(field: &mut Array2<Complex64>, dir: Direction, mult: &[Complex64]) {
    assert_eq!(mult.len(), field.len_of(dir.nd()));
    fft_lanes(field, dir, false);
    match dir {
        Direction::Dual => field.axis_iter_mut(NdAxis(0)).into_par_iter().for_each(|mut row| {
            for (v, m) in row.iter_mut().zip(mult) {
                *v *= m;
            }
        }),
        Direction::Position => field.axis_iter_mut(NdAxis(0)).into_par_iter().enumerate().for_each(
            |(i, mut row)| {
                let m = mult[i];
                row.iter_mut().for_each(|v| *v *= m);
            },
        ),
    }
    fft_lanes(field, dir, true);
}

/// FFT along `dir`, multiply entry `(mode, lane)` by `f(mode, lane)`, inverse.
/// `lane` indexes the orthogonal direction.
pub fn apply_lane_fn<F>(field: &mut Array2<Complex64>, dir: Direction, f: F)
where
    F: Fn(usize, usize) -> Complex64 + Sync,
{
    fft_lanes(field, dir, false);
    field.axis_iter_mut(NdAxis(0)).into_par_iter().enumerate().for_each(|(i, mut row)| {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= match dir {
                Direction::Position => f(i, j),
                Direction::Dual => f(j, i),
            };
        }
    });
    fft_lanes(field, dir, true);
}

/// Two-dimensional FFT, multiply by `mult(kq_index, kdual_index)`, inverse.
pub fn apply_2d_multiplier<F>(field: &mut Array2<Complex64>, mult: F)
where
    F: Fn(usize, usize) -> Complex64 + Sync,
{
    fft_lanes(field, Direction::Position, false);
    fft_lanes(field, Direction::Dual, false);
    field.axis_iter_mut(NdAxis(0)).into_par_iter().enumerate().for_each(|(i, mut row)| {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= mult(i, j);
        }
    });
    fft_lanes(field, Direction::Dual, true);
    fft_lanes(field, Direction::Position, true);
}

/// Spectral first derivative along `dir` given derivative wavenumbers.
pub fn derivative(field: &Array2<Complex64>, dir: Direction, wavenumbers: &[f64]) -> Array2<Complex64> {
    let mult: Vec<Complex64> = wavenumbers.iter().map(|&k| Complex64::new(0.0, k)).collect();
    let mut out = field.clone();
    apply_lane_multiplier(&mut out, dir, &mult);
    out
}

/// Evaluates the trigonometric interpolant of a periodic sample vector.
/// `coeffs` are forward-FFT coefficients divided by `n`, `k` the matching
/// wavenumbers, `x` measured from the first sample.
pub fn trig_eval(coeffs: &[Complex64], k: &[f64], x: f64) -> Complex64 {
    let n = coeffs.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..n {
        if m == n / 2 {
            // split the Nyquist mode symmetrically so real data stays real
            acc += coeffs[m] * (k[m] * x).cos();
        } else {
            acc += coeffs[m] * Complex64::cis(k[m] * x);
        }
    }
    acc
}
