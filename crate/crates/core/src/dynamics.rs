//! The transport term shared by the regularized and the direct solvers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{FourierMultiplier, Grid, SpectralField};

/// Which active scalar law drives the transport.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Modified porous media, 3-D.
    Mpm3d,
    /// Modified quasi-geostrophic, 2-D.
    Qg2d,
}

impl Model {
    pub fn dim(self) -> usize {
        match self {
            Model::Mpm3d => 3,
            Model::Qg2d => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Mpm3d => "mpm3d",
            Model::Qg2d => "qg2d",
        }
    }

    pub fn velocity_law(self, alpha: f64) -> Result<FourierMultiplier> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        match self {
            Model::Mpm3d => FourierMultiplier::mpm(alpha),
            Model::Qg2d => FourierMultiplier::qg(alpha),
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mpm3d" | "mpm" => Ok(Model::Mpm3d),
            "qg2d" | "qg" => Ok(Model::Qg2d),
            other => Err(Error::param(format!("unknown model '{other}' (expected mpm3d or qg2d)"))),
        }
    }
}

/// Precomputed symbols for `−u·∇θ` with 3/2-rule dealiasing.
#[derive(Clone, Debug)]
pub struct Transport {
    grid: Grid,
    padded: Grid,
    velocity: Vec<Vec<Complex64>>,
    gradient: Vec<Vec<Complex64>>,
    /// Padded-grid index of every non-Nyquist coarse mode.
    pad_map: Vec<Option<usize>>,
    frozen: bool,
}

impl Transport {
    pub fn new(grid: Grid, model: Model, alpha: f64) -> Result<Self> {
        if grid.dim() != model.dim() {
            return Err(Error::InvalidGrid(format!("{} needs a {}-D grid", model.name(), model.dim())));
        }
        if grid.n() < 8 || !grid.n().is_multiple_of(4) {
            return Err(Error::InvalidGrid(format!(
                "dynamics need n >= 8 divisible by 4 for 3/2 padding, got n = {}",
                grid.n()
            )));
        }
        let velocity = model.velocity_law(alpha)?.tabulate(&grid)?;
        let gradient = (0..grid.dim())
            .map(|axis| FourierMultiplier::Derivative { axis }.tabulate(&grid).map(|mut t| t.remove(0)))
            .collect::<Result<_>>()?;
        let padded = grid.padded();
        let pad_map = (0..grid.len())
            .map(|i| {
                if grid.is_nyquist(i) {
                    return None;
                }
                let m = grid.mode(i);
                let mut idx = [0usize; 3];
                for axis in 0..grid.dim() {
                    idx[axis] = padded.position_of(m[axis]).expect("coarse mode fits");
                }
                Some(padded.flatten(&idx[..grid.dim()]))
            })
            .collect();
        Ok(Self { grid, padded, velocity, gradient, pad_map, frozen: false })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Test hook: transport by `u ≡ 0`.
    pub fn freeze_velocity(&mut self) {
        self.frozen = true;
    }

    pub fn velocity(&self, theta: &SpectralField) -> Vec<SpectralField> {
        self.velocity
            .iter()
            .map(|sym| {
                let scale = if self.frozen { 0.0 } else { 1.0 };
                let c = theta.coeffs().iter().zip(sym).map(|(a, s)| a * s * scale).collect();
                SpectralField::from_raw(self.grid, c)
            })
            .collect()
    }

    /// Grid maximum of `|u|`.
    pub fn velocity_sup(&self, theta: &SpectralField) -> f64 {
        let comps: Vec<Vec<f64>> = self.velocity(theta).iter().map(|u| u.inverse().into_values()).collect();
        (0..self.grid.len()).map(|i| comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt()).fold(0.0, f64::max)
    }

    fn pad(&self, coeffs: impl Iterator<Item = Complex64>) -> Vec<f64> {
        let mut out = vec![Complex64::default(); self.padded.len()];
        for (c, slot) in coeffs.zip(&self.pad_map) {
            if let Some(j) = slot {
                out[*j] = c;
            }
        }
        SpectralField::from_raw(self.padded, out).inverse().into_values()
    }

    /// `−(u·∇θ)^`, with the product formed on the padded grid.
    pub fn advection(&self, theta: &SpectralField) -> SpectralField {
        if self.frozen {
            return SpectralField::zeros(self.grid);
        }
        let th = theta.coeffs();
        let mut product = vec![0.0; self.padded.len()];
        for (vel, grad) in self.velocity.iter().zip(&self.gradient) {
            let u = self.pad(th.iter().zip(vel).map(|(a, s)| a * s));
            let g = self.pad(th.iter().zip(grad).map(|(a, s)| a * s));
            for ((p, a), b) in product.iter_mut().zip(&u).zip(&g) {
                *p -= a * b;
            }
        }
        let hat = crate::spectral::ScalarField::from_raw(self.padded, product).transform();
        let full = hat.coeffs();
        let coeffs = self.pad_map.iter().map(|slot| slot.map_or(Complex64::default(), |j| full[j])).collect();
        SpectralField::from_raw(self.grid, coeffs)
    }
}

/// `|k|^s` on the lattice, zero at the origin.
pub(crate) fn power_symbol(grid: &Grid, s: f64) -> Vec<f64> {
    (0..grid.len())
        .map(|i| {
            let k = grid.wavevector(i);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == 0.0 {
                0.0
            } else {
                k2.powf(0.5 * s)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_field, ScalarField};

    #[test]
    fn rejects_bad_setups() {
        assert!(Transport::new(Grid::periodic(2, 16).unwrap(), Model::Mpm3d, 0.5).is_err());
        assert!(Transport::new(Grid::periodic(2, 6).unwrap(), Model::Qg2d, 0.5).is_err());
        assert!(Transport::new(Grid::periodic(2, 16).unwrap(), Model::Qg2d, 1.0).is_err());
        assert_eq!("QG".parse::<Model>().unwrap(), Model::Qg2d);
        assert!("nse".parse::<Model>().is_err());
    }

    #[test]
    fn dealiased_product_matches_exact_transport() {
        // θ = cos x + ½cos 2y at α = 1/2 gives u = (−2^{-3/2} sin 2y, sin x)
        // and u·∇θ = (2^{-3/2} − 1) sin x sin 2y.
        let g = Grid::periodic(2, 16).unwrap();
        let th = ScalarField::from_fn(g, |x| x[0].cos() + 0.5 * (2.0 * x[1]).cos()).unwrap();
        let t = Transport::new(g, Model::Qg2d, 0.5).unwrap();
        let adv = t.advection(&th.transform()).inverse();
        let c = 2f64.powf(-1.5) - 1.0;
        let exact = ScalarField::from_fn(g, |x| -c * x[0].sin() * (2.0 * x[1]).sin()).unwrap();
        assert!(adv.sub(&exact).unwrap().max_abs() < 1e-13);
        let mut frozen = t.clone();
        frozen.freeze_velocity();
        assert_eq!(frozen.advection(&th.transform()).inverse().max_abs(), 0.0);
        assert!((t.velocity_sup(&th.transform()) - (1.0 + 2f64.powf(-3.0)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn transport_preserves_mean_and_energy() {
        for (model, dim) in [(Model::Qg2d, 2), (Model::Mpm3d, 3)] {
            let g = Grid::periodic(dim, if dim == 2 { 32 } else { 12 }).unwrap();
            let th = random_field(g, 11, |k| if k < 4.0 { 1.0 } else { 0.0 });
            let t = Transport::new(g, model, 0.4).unwrap();
            let adv = t.advection(&th);
            assert!(adv.zero_mode().norm() < 1e-14);
            // ∫θ u·∇θ = 0 for divergence-free u: Σ conj(θ̂)·adv = 0.
            let dot: f64 = th.coeffs().iter().zip(adv.coeffs()).map(|(a, b)| (a.conj() * b).re).sum();
            assert!(dot.abs() < 1e-12, "{model:?}: {dot}");
        }
    }
}
