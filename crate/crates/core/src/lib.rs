//! Classical mechanics as unitary evolution of a complex phase-space
//! amplitude, with elastic-wall confinement, band spectra and the
//! quantum-to-classical contraction.

pub mod boundary;
pub mod error;
pub mod evolution;
pub mod fourier;
pub mod grid;
pub mod kappa;
pub mod observables;
pub mod oracle;
pub mod spectral;
pub mod state;
pub mod transform;

pub use error::{KvnError, Result};
pub use grid::{Axis, GridSpec, UnitSystem};
pub use state::{make_gaussian_state, GaussianSpec, KvnState, Representation};
pub use transform::{to_dual, to_momentum, to_representation};
