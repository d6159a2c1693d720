use num_complex::Complex64;
use rustfft::FftDirection;

use super::fft::fft_nd;
use super::grid::Grid;
use crate::error::{Error, Result};

/// Real samples of a scalar on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

/// Fourier coefficients of a field, normalized so that `cos(k·x)` has
/// coefficients of modulus 1/2 at `±k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn new(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!("expected {} samples, got {}", grid.len(), data.len())));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![0.0; grid.len()] }
    }

    /// Unchecked constructor for internal products, which may overflow.
    pub(crate) fn from_raw(grid: Grid, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), grid.len());
        Self { grid, data }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let data = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self::new(grid, data)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Grid maximum of `|f|`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(∫|f|^p)^{1/p}` by the rectangle rule; `p = ∞` is the grid maximum.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        let s: f64 = self.data.iter().map(|v| v.abs().powf(p)).sum();
        (s * self.grid.cell_volume()).powf(1.0 / p)
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        Self { grid: self.grid, data: self.data.iter().map(|v| c * v).collect() }
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.grid.check_same(&other.grid)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, data })
    }

    /// Forward transform divided by the point count.
    pub fn transform(&self) -> SpectralField {
        let mut coeffs: Vec<Complex64> = self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut coeffs, self.grid.dim(), self.grid.n(), FftDirection::Forward);
        let scale = 1.0 / self.grid.len() as f64;
        for c in &mut coeffs {
            *c *= scale;
        }
        SpectralField { grid: self.grid, coeffs }
    }
}

impl SpectralField {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch(format!("expected {} coefficients, got {}", grid.len(), coeffs.len())));
        }
        if let Some(index) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, coeffs: vec![Complex64::default(); grid.len()] }
    }

    /// Single mode `amplitude·e^{i m·x}` for signed lattice indices `m`.
    pub fn single_mode(grid: Grid, mode: &[i64], amplitude: Complex64) -> Result<Self> {
        let mut f = Self::zeros(grid);
        let mut idx = [0usize; 3];
        for axis in 0..grid.dim() {
            let m = mode.get(axis).copied().unwrap_or(0);
            idx[axis] =
                grid.position_of(m).ok_or_else(|| Error::param(format!("mode index {m} not on the lattice")))?;
        }
        f.coeffs[grid.flatten(&idx[..grid.dim()])] = amplitude;
        Ok(f)
    }

    pub(crate) fn from_raw(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Largest `|c(k) - conj(c(-k))|` over non-Nyquist modes.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .filter(|&i| !self.grid.is_nyquist(i))
            .map(|i| (self.coeffs[i] - self.coeffs[self.grid.conjugate_index(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `∫|f|² = L^dim Σ|c(k)|²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Multiplies coefficient `k` by `w(k)` for real weights.
    pub fn map_real(&self, w: impl Fn(usize) -> f64) -> SpectralField {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, c)| c * w(i)).collect();
        Self { grid: self.grid, coeffs }
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.grid.check_same(&other.grid)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid, coeffs })
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.grid.check_same(&other.grid)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, coeffs })
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        Self { grid: self.grid, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Largest coefficient modulus difference.
    pub fn max_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Inverse transform; the imaginary residue of a Hermitian field is dropped.
    pub fn inverse(&self) -> ScalarField {
        let mut work = self.coeffs.clone();
        fft_nd(&mut work, self.grid.dim(), self.grid.n(), FftDirection::Inverse);
        ScalarField { grid: self.grid, data: work.into_iter().map(|c| c.re).collect() }
    }

    /// Copies coefficients onto a finer grid of the same box, padding with zeros.
    /// Nyquist modes of the source are dropped.
    pub fn zero_pad(&self, target: Grid) -> SpectralField {
        debug_assert!(target.n() >= self.grid.n() && target.dim() == self.grid.dim());
        let mut out = SpectralField::zeros(target);
        for i in 0..self.coeffs.len() {
            if self.grid.is_nyquist(i) {
                continue;
            }
            let m = self.grid.mode(i);
            let mut idx = [0usize; 3];
            for axis in 0..target.dim() {
                idx[axis] = target.position_of(m[axis]).expect("mode fits on finer grid");
            }
            out.coeffs[target.flatten(&idx[..target.dim()])] = self.coeffs[i];
        }
        out
    }

    /// Keeps the modes representable on a coarser grid of the same box,
    /// dropping the coarse Nyquist plane.
    pub fn truncate(&self, target: Grid) -> SpectralField {
        debug_assert!(target.n() <= self.grid.n() && target.dim() == self.grid.dim());
        let mut out = SpectralField::zeros(target);
        for i in 0..target.len() {
            if target.is_nyquist(i) {
                continue;
            }
            let m = target.mode(i);
            let mut idx = [0usize; 3];
            for axis in 0..target.dim() {
                idx[axis] = self.grid.position_of(m[axis]).expect("coarse mode on fine grid");
            }
            out.coeffs[i] = self.coeffs[self.grid.flatten(&idx[..target.dim()])];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use std::f64::consts::TAU;

    #[test]
    fn cosine_has_half_amplitude_modes() {
        let g = Grid::new(2, 16, TAU).unwrap();
        let f = ScalarField::from_fn(g, |x| (3.0 * x[0]).cos()).unwrap();
        let fh = f.transform();
        for (i, c) in fh.coeffs().iter().enumerate() {
            let m = g.mode(i);
            if m[1] == 0 && m[0].abs() == 3 {
                assert!((c.norm() - 0.5).abs() < 1e-14);
            } else {
                assert!(c.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_lives_in_zero_mode() {
        let g = Grid::new(3, 8, TAU).unwrap();
        let f = ScalarField::new(g, vec![2.5; g.len()]).unwrap();
        let fh = f.transform();
        assert!((fh.zero_mode().re - 2.5).abs() < 1e-14);
        assert!(fh.coeffs()[1..].iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn round_trip_and_hermitian() {
        for &(dim, n) in &[(2usize, 8usize), (2, 32), (2, 48), (3, 8), (3, 16)] {
            let g = Grid::new(dim, n, TAU).unwrap();
            let mut rng = SplitMix64::new(n as u64);
            let f = ScalarField::new(g, (0..g.len()).map(|_| rng.next_normal()).collect()).unwrap();
            let fh = f.transform();
            assert!(fh.hermitian_defect() < 1e-15);
            let back = fh.inverse();
            let err = back.sub(&f).unwrap().max_abs();
            assert!(err < 1e-12 * f.max_abs(), "dim {dim} n {n}: {err}");
        }
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::new(2, 4, TAU).unwrap();
        let mut v = vec![0.0; 16];
        v[5] = f64::NAN;
        assert!(matches!(ScalarField::new(g, v), Err(Error::NonFinite { index: 5 })));
    }

    #[test]
    fn parseval() {
        let g = Grid::new(2, 16, TAU).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0].sin() + 0.3 * (2.0 * x[1]).cos()).unwrap();
        let direct = f.lp_norm(2.0).powi(2);
        assert!((direct - f.transform().l2_norm_sq()).abs() < 1e-10);
    }

    #[test]
    fn pad_then_truncate_is_identity() {
        let g = Grid::new(2, 8, TAU).unwrap();
        let f = ScalarField::from_fn(g, |x| (x[0] + 2.0 * x[1]).sin()).unwrap().transform();
        let back = f.zero_pad(g.padded()).truncate(g);
        assert!(back.max_diff(&f) < 1e-15);
    }
}
