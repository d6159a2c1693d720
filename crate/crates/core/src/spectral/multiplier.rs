use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::Grid;
use crate::error::{Error, Result};

/// Constant multiplying `θ e₃` in the porous-media velocity law when the
/// pressure is eliminated through `-curl curl u = Δu`.
pub const MPM_IDENTITY_COEFFICIENT: f64 = -2.0 / 3.0;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Fourier symbols used by the toolkit.
///
/// Conventions on the lattice:
/// * symbols with a negative power of `|k|` map the zero mode to 0,
///   except `Λ^0` which is the identity;
/// * operators whose symbol is odd in `k` zero every mode that touches the
///   unpaired Nyquist index, which has no conjugate partner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FourierMultiplier {
    /// `Λ^s`, symbol `|k|^s`.
    FractionalLaplacian { order: f64 },
    /// `R_j`, symbol `-i k_j/|k|`.
    Riesz { axis: usize },
    /// `∂_j`, symbol `i k_j`.
    Derivative { axis: usize },
    /// Modified porous-media law `u = Λ^{α-1}(C θ e₃ + P θ)` in 3-D.
    MpmVelocity { alpha: f64, c: f64 },
    /// Modified quasi-geostrophic law `u = Λ^{α-1}(-R₂θ, R₁θ)` in 2-D.
    QgVelocity { alpha: f64 },
}

impl FourierMultiplier {
    pub fn mpm(alpha: f64) -> Result<Self> {
        Self::mpm_with_coefficient(alpha, MPM_IDENTITY_COEFFICIENT)
    }

    /// `alpha = 1` gives the unmodified porous-media law.
    pub fn mpm_with_coefficient(alpha: f64, c: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        Ok(Self::MpmVelocity { alpha, c })
    }

    pub fn qg(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        Ok(Self::QgVelocity { alpha })
    }

    /// Number of output components on a grid of dimension `dim`.
    pub fn components(&self) -> usize {
        match self {
            Self::MpmVelocity { .. } => 3,
            Self::QgVelocity { .. } => 2,
            _ => 1,
        }
    }

    /// Degree of homogeneity of the symbol.
    pub fn order(&self) -> f64 {
        match *self {
            Self::FractionalLaplacian { order } => order,
            Self::Riesz { .. } => 0.0,
            Self::Derivative { .. } => 1.0,
            Self::MpmVelocity { alpha, .. } | Self::QgVelocity { alpha } => alpha - 1.0,
        }
    }

    pub fn is_odd(&self) -> bool {
        !matches!(self, Self::FractionalLaplacian { .. })
    }

    /// Symbol at a nonzero wavevector; unused trailing components are zero.
    pub fn symbol(&self, k: [f64; 3]) -> [Complex64; 3] {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let kn = k2.sqrt();
        let zero = Complex64::default();
        match *self {
            Self::FractionalLaplacian { order } => [Complex64::new(kn.powf(order), 0.0), zero, zero],
            Self::Riesz { axis } => [-I * (k[axis] / kn), zero, zero],
            Self::Derivative { axis } => [I * k[axis], zero, zero],
            Self::MpmVelocity { alpha, c } => {
                let g = kn.powf(alpha - 1.0);
                let p3 = (2.0 * k[2] * k[2] - k[0] * k[0] - k[1] * k[1]) / (3.0 * k2);
                [
                    Complex64::new(g * k[0] * k[2] / k2, 0.0),
                    Complex64::new(g * k[1] * k[2] / k2, 0.0),
                    Complex64::new(g * (c + p3), 0.0),
                ]
            }
            Self::QgVelocity { alpha } => {
                let g = kn.powf(alpha - 1.0) / kn;
                [I * (g * k[1]), -I * (g * k[0]), zero]
            }
        }
    }

    /// Value at `k = 0`.
    pub fn zero_mode(&self) -> [Complex64; 3] {
        let zero = Complex64::default();
        match *self {
            Self::FractionalLaplacian { order: 0.0 } => [Complex64::new(1.0, 0.0), zero, zero],
            _ => [zero; 3],
        }
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        match *self {
            Self::MpmVelocity { .. } if grid.dim() != 3 => {
                Err(Error::param("the porous-media velocity law needs a 3-D grid"))
            }
            Self::QgVelocity { .. } if grid.dim() != 2 => {
                Err(Error::param("the quasi-geostrophic velocity law needs a 2-D grid"))
            }
            Self::Riesz { axis } | Self::Derivative { axis } if axis >= grid.dim() => {
                Err(Error::param(format!("axis {axis} out of range for a {}-D grid", grid.dim())))
            }
            Self::FractionalLaplacian { order } if order <= -(grid.dim() as f64) => {
                Err(Error::param(format!("order {order} must exceed -{} for a locally integrable kernel", grid.dim())))
            }
            _ => Ok(()),
        }
    }

    /// Symbol sampled on every lattice point, one array per component.
    pub fn tabulate(&self, grid: &Grid) -> Result<Vec<Vec<Complex64>>> {
        self.check_grid(grid)?;
        let nc = self.components();
        let mut table = vec![vec![Complex64::default(); grid.len()]; nc];
        let z = self.zero_mode();
        for c in 0..nc {
            table[c][0] = z[c];
        }
        for i in 1..grid.len() {
            if self.is_odd() && grid.is_nyquist(i) {
                continue;
            }
            let s = self.symbol(grid.wavevector(i));
            for c in 0..nc {
                table[c][i] = s[c];
            }
        }
        Ok(table)
    }

    pub fn apply(&self, f: &SpectralField) -> Result<Vec<SpectralField>> {
        if let Self::FractionalLaplacian { order } = *self {
            if order < 0.0 {
                check_mean_free(f, order)?;
            }
        }
        let table = self.tabulate(f.grid())?;
        Ok(table
            .into_iter()
            .map(|sym| {
                let coeffs = f.coeffs().iter().zip(&sym).map(|(c, s)| c * s).collect();
                SpectralField::from_raw(*f.grid(), coeffs)
            })
            .collect())
    }
}

fn check_mean_free(f: &SpectralField, order: f64) -> Result<()> {
    let scale = f.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let mean = f.zero_mode().norm();
    if mean > 1e-13 * scale.max(f64::MIN_POSITIVE) && mean > 0.0 {
        return Err(Error::NonzeroMean { order, mean });
    }
    Ok(())
}

/// `Λ^s θ`.
pub fn fractional_laplacian(theta: &SpectralField, s: f64) -> Result<SpectralField> {
    Ok(FourierMultiplier::FractionalLaplacian { order: s }.apply(theta)?.remove(0))
}

/// `R_j θ`.
pub fn riesz_transform(theta: &SpectralField, axis: usize) -> Result<SpectralField> {
    Ok(FourierMultiplier::Riesz { axis }.apply(theta)?.remove(0))
}

/// `∂_j θ`.
pub fn derivative(theta: &SpectralField, axis: usize) -> Result<SpectralField> {
    Ok(FourierMultiplier::Derivative { axis }.apply(theta)?.remove(0))
}

pub fn gradient(theta: &SpectralField) -> Result<Vec<SpectralField>> {
    (0..theta.grid().dim()).map(|axis| derivative(theta, axis)).collect()
}

/// Modified porous-media velocity with the derivation constant `C = -2/3`.
pub fn mpm_velocity(theta: &SpectralField, alpha: f64) -> Result<Vec<SpectralField>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    FourierMultiplier::mpm(alpha)?.apply(theta)
}

/// Modified quasi-geostrophic velocity.
pub fn qg_velocity(theta: &SpectralField, alpha: f64) -> Result<Vec<SpectralField>> {
    FourierMultiplier::qg(alpha)?.apply(theta)
}

/// Largest `|k·m(k)| / (|k||m(k)| + tiny)` over the lattice.
pub fn divergence_residual(velocity: &[SpectralField]) -> f64 {
    let grid = velocity[0].grid();
    let mut worst = 0.0f64;
    for i in 1..grid.len() {
        let k = grid.wavevector(i);
        let mut dot = Complex64::default();
        let mut norm = 0.0;
        for (c, u) in velocity.iter().enumerate() {
            dot += u.coeffs()[i] * k[c];
            norm += u.coeffs()[i].norm_sqr();
        }
        let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        worst = worst.max(dot.norm() / (kn * norm.sqrt() + 1e-300));
    }
    worst
}
