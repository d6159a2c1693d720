//! Periodic grids, transforms and Fourier-multiplier operators.

mod fft;
mod field;
mod grid;
mod kernel;
mod multiplier;
mod random;
pub mod snapshot;

pub use field::{ScalarField, SpectralField};
pub use grid::Grid;
pub use kernel::{kernel_multiplier_consistency, KernelOptions, KernelReport};
pub use multiplier::{
    derivative, divergence_residual, fractional_laplacian, gradient, mpm_velocity, qg_velocity, riesz_transform,
    FourierMultiplier, MPM_IDENTITY_COEFFICIENT,
};
pub use random::random_field;
