//! Real-space cross-check of the porous-media velocity multiplier.
//!
//! At `α = 1` the law reads `u = C θ e₃ + P θ`, where `P` is convolution
//! with `-(1/4π) PV K`, `K(x) = (3x₁x₃, 3x₂x₃, 2x₃² - x₁² - x₂²)/|x|⁵`. The
//! convolution is evaluated as an exact periodic lattice sum of the sampled
//! kernel, truncated inside `2h` and tapered smoothly to zero at `L/2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::field::{ScalarField, SpectralField};
use super::multiplier::{FourierMultiplier, MPM_IDENTITY_COEFFICIENT};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KernelOptions {
    /// Coefficient of the `θ e₃` term.
    pub c: f64,
    /// Inner exclusion radius in grid spacings.
    pub inner_cells: f64,
    /// Outer truncation radius as a fraction of the box length.
    pub outer_fraction: f64,
    /// Fraction of the outer radius where the taper starts.
    pub taper_start: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self { c: MPM_IDENTITY_COEFFICIENT, inner_cells: 2.0, outer_fraction: 0.5, taper_start: 0.5 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelReport {
    pub n: usize,
    /// Max pointwise discrepancy per velocity component.
    pub per_component: [f64; 3],
    pub max_discrepancy: f64,
    /// Max pointwise velocity magnitude from the multiplier route.
    pub max_velocity: f64,
}

/// `C^∞` step: 1 for `t ≤ 0`, 0 for `t ≥ 1`.
fn smooth_step_down(t: f64) -> f64 {
    fn g(s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else {
            (-1.0 / s).exp()
        }
    }
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        g(1.0 - t) / (g(1.0 - t) + g(t))
    }
}

/// Compares the `α = 1` multiplier velocity with the real-space kernel sum.
///
/// `theta` must be a mean-free 3-D field.
pub fn kernel_multiplier_consistency(theta: &ScalarField, opts: &KernelOptions) -> Result<KernelReport> {
    let grid = *theta.grid();
    if grid.dim() != 3 {
        return Err(Error::param("kernel consistency is defined for 3-D grids"));
    }
    let theta_hat = theta.transform();
    let multiplier = FourierMultiplier::mpm_with_coefficient(1.0, opts.c)?;
    let spectral: Vec<ScalarField> = multiplier.apply(&theta_hat)?.iter().map(|u| u.inverse()).collect();

    let h = grid.spacing();
    let inner = opts.inner_cells * h;
    let outer = opts.outer_fraction * grid.length();
    let taper_from = opts.taper_start * outer;
    let mut kernel = vec![vec![0.0; grid.len()]; 3];
    for i in 0..grid.len() {
        let y = grid.min_image(i, 0);
        let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        if r < inner || r >= outer {
            continue;
        }
        let w = smooth_step_down((r - taper_from) / (outer - taper_from)) / r.powi(5);
        kernel[0][i] = w * 3.0 * y[0] * y[2];
        kernel[1][i] = w * 3.0 * y[1] * y[2];
        kernel[2][i] = w * (2.0 * y[2] * y[2] - y[0] * y[0] - y[1] * y[1]);
    }

    // Cyclic convolution: (Σ_j K(x_i - x_j) θ_j h³)^ = L³ K̂ θ̂ with normalized transforms.
    let scale = -grid.volume() / (4.0 * PI);
    let mut per_component = [0.0; 3];
    let mut max_velocity = 0.0f64;
    for c in 0..3 {
        let k_hat = ScalarField::new(grid, std::mem::take(&mut kernel[c]))?.transform();
        let coeffs = k_hat.coeffs().iter().zip(theta_hat.coeffs()).map(|(a, b)| a * b * scale).collect();
        let mut direct = SpectralField::new(grid, coeffs)?.inverse().into_values();
        if c == 2 {
            for (d, t) in direct.iter_mut().zip(theta.values()) {
                *d += opts.c * t;
            }
        }
        let s = spectral[c].values();
        per_component[c] = direct.iter().zip(s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        max_velocity = max_velocity.max(spectral[c].max_abs());
    }
    Ok(KernelReport {
        n: grid.n(),
        per_component,
        max_discrepancy: per_component.iter().cloned().fold(0.0, f64::max),
        max_velocity,
    })
}
