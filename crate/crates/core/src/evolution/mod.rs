//! Time evolution: exact spectral free flight, the free and image-sum
//! kernels, confined billiard flow, uniform gravity, and split-step
//! propagation for smooth potentials.

mod billiard;
mod free;
mod gravity;
mod kernel;
mod potential;
mod splitstep;

pub use billiard::{box_gaussian_state, evolve_box, BoxBackend};
pub use free::evolve_free_spectral;
pub use gravity::evolve_gravity;
pub use kernel::{kernel_box, kernel_free, propagate_image_kernel, ImagePropagation, ImageSumPolicy};
pub use potential::PotentialSpec;
pub use splitstep::evolve_splitstep;
