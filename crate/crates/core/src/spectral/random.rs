use num_complex::Complex64;

use super::{Grid, SpectralField};
use crate::rng::SplitMix64;

/// Real random field with independent Gaussian Fourier coefficients of
/// standard deviation `amplitude(|k|)`.
///
/// Each coefficient is drawn from a stream keyed by its integer mode, so the
/// same seed yields the same coefficients on any grid that resolves the
/// mode. The mean and the unpaired Nyquist modes are zero.
pub fn random_field(grid: Grid, seed: u64, amplitude: impl Fn(f64) -> f64) -> SpectralField {
    let dim = grid.dim();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (flat, c) in coeffs.iter_mut().enumerate() {
        if grid.is_nyquist(flat) {
            continue;
        }
        let m = grid.mode(flat);
        let first = m[..dim].iter().copied().find(|&v| v != 0);
        let Some(lead) = first else { continue };
        let canonical: Vec<i64> = if lead > 0 { m[..dim].to_vec() } else { m[..dim].iter().map(|v| -v).collect() };
        let k = grid.wavevector(flat);
        let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        let a = amplitude(kn);
        if a == 0.0 {
            continue;
        }
        let mut rng = SplitMix64::keyed(seed, &canonical);
        let (re, im) = (rng.next_normal(), rng.next_normal());
        let z = Complex64::new(re, im) * (a * std::f64::consts::FRAC_1_SQRT_2);
        *c = if lead > 0 { z } else { z.conj() };
    }
    SpectralField::from_raw(grid, coeffs)
}
