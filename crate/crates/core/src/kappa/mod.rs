//! Schrodinger evolution at effective Planck constant `kappa hbar`, the
//! kappa-Wigner transform, and the experiments that compare the quantum
//! dynamics with classical Liouville flow.

mod experiments;
mod schrodinger;
mod wigner;

pub use experiments::{
    contraction_experiment, fringe_visibility, two_slit_compare, ContractionRow, ContractionSetup, PhaseSpaceGaussian,
    TwoSlitReport, TwoSlitSetup,
};
pub use schrodinger::{evolve_schrodinger_kappa, WaveFunction1D};
pub use wigner::{conjugate_momentum_axis, two_point_density, two_point_residual, wigner_kappa, WignerField};
