use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A periodic box `[0, L)^dim` sampled with `n` points per axis.
///
/// Samples are stored row-major with the last axis fastest. Axis index `i`
/// carries the signed wavenumber index `i` for `i < n/2` and `i - n`
/// otherwise, so the lattice is `(2π/L)·{-n/2, …, n/2-1}` per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("points per axis must be even and at least 4, got {n}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!("box length must be positive, got {length}")));
        }
        Ok(Self { dim, n, length })
    }

    /// Grid on the default `2π` box.
    pub fn periodic(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, TAU)
    }

    /// Same box, `3n/2` points per axis, for dealiased quadratic products.
    pub fn padded(&self) -> Grid {
        Grid { dim: self.dim, n: 3 * self.n / 2, length: self.length }
    }

    /// Same box with `factor` times the points per axis.
    pub fn refined(&self, factor: usize) -> Grid {
        Grid { dim: self.dim, n: self.n * factor, length: self.length }
    }

    /// Same samples on a box `factor` times smaller.
    pub fn shrunk(&self, factor: f64) -> Grid {
        Grid { dim: self.dim, n: self.n, length: self.length / factor }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Lattice spacing in wavenumber space, `2π/L`.
    pub fn dk(&self) -> f64 {
        TAU / self.length
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Signed wavenumber index of axis position `i`.
    pub fn signed_index(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Axis position holding signed wavenumber index `m`, if it is on the lattice.
    pub fn position_of(&self, m: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if m < -half || m >= half {
            return None;
        }
        Some(if m >= 0 { m as usize } else { (m + self.n as i64) as usize })
    }

    /// Per-axis positions of a flat index. Unused trailing axes are zero.
    pub fn unflatten(&self, mut flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for axis in (0..self.dim).rev() {
            out[axis] = flat % self.n;
            flat /= self.n;
        }
        out
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.dim).fold(0, |acc, &i| acc * self.n + (i % self.n))
    }

    /// Signed wavenumber indices at a flat index.
    pub fn mode(&self, flat: usize) -> [i64; 3] {
        let idx = self.unflatten(flat);
        let mut m = [0i64; 3];
        for axis in 0..self.dim {
            m[axis] = self.signed_index(idx[axis]);
        }
        m
    }

    /// Physical wavevector at a flat index.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let m = self.mode(flat);
        let dk = self.dk();
        [m[0] as f64 * dk, m[1] as f64 * dk, m[2] as f64 * dk]
    }

    /// True if any axis sits on the unpaired Nyquist index `-n/2`.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let idx = self.unflatten(flat);
        idx.iter().take(self.dim).any(|&i| i == self.n / 2)
    }

    /// Flat index of the mode `-k`.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let idx = self.unflatten(flat);
        let mut c = [0usize; 3];
        for axis in 0..self.dim {
            c[axis] = (self.n - idx[axis]) % self.n;
        }
        self.flatten(&c[..self.dim])
    }

    /// Physical coordinates of a flat index.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let h = self.spacing();
        [idx[0] as f64 * h, idx[1] as f64 * h, idx[2] as f64 * h]
    }

    /// Minimum-image displacement between two grid points, per axis.
    pub fn min_image(&self, a: usize, b: usize) -> [f64; 3] {
        let ia = self.unflatten(a);
        let ib = self.unflatten(b);
        let mut d = [0.0; 3];
        let n = self.n as i64;
        for axis in 0..self.dim {
            let mut s = ia[axis] as i64 - ib[axis] as i64;
            s = s.rem_euclid(n);
            if s > n / 2 {
                s -= n;
            }
            d[axis] = s as f64 * self.spacing();
        }
        d
    }

    pub fn periodic_distance(&self, a: usize, b: usize) -> f64 {
        let d = self.min_image(a, b);
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    /// Largest `|k|` on the lattice (the corner of the wavenumber box).
    pub fn max_wavenumber(&self) -> f64 {
        (self.dim as f64).sqrt() * (self.n / 2) as f64 * self.dk()
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::new(1, 8, TAU).is_err());
        assert!(Grid::new(4, 8, TAU).is_err());
        assert!(Grid::new(2, 7, TAU).is_err());
        assert!(Grid::new(2, 2, TAU).is_err());
        assert!(Grid::new(3, 8, 0.0).is_err());
        assert!(Grid::new(3, 8, -1.0).is_err());
    }

    #[test]
    fn integer_lattice_on_two_pi_box() {
        let g = Grid::new(2, 8, TAU).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.signed_index(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        let mut sorted = ks.clone();
        sorted.sort();
        assert_eq!(sorted, (-4..=3).collect::<Vec<_>>());
        assert!((g.dk() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn point_count_and_spacing() {
        assert_eq!(Grid::new(3, 32, TAU).unwrap().len(), 32768);
        let g = Grid::new(2, 4, std::f64::consts::PI).unwrap();
        assert!((g.dk() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn conjugate_and_nyquist() {
        let g = Grid::new(3, 8, TAU).unwrap();
        for flat in 0..g.len() {
            let c = g.conjugate_index(flat);
            assert_eq!(g.conjugate_index(c), flat);
            if !g.is_nyquist(flat) {
                let (m, mc) = (g.mode(flat), g.mode(c));
                assert_eq!([m[0] + mc[0], m[1] + mc[1], m[2] + mc[2]], [0, 0, 0]);
            }
        }
        assert!(g.is_nyquist(g.flatten(&[4, 0, 0])));
        assert!(!g.is_nyquist(g.flatten(&[3, 5, 0])));
    }

    #[test]
    fn min_image_is_short() {
        let g = Grid::new(2, 16, TAU).unwrap();
        let a = g.flatten(&[0, 0]);
        let b = g.flatten(&[15, 1]);
        let d = g.min_image(a, b);
        assert!((d[0] - g.spacing()).abs() < 1e-14);
        assert!((d[1] + g.spacing()).abs() < 1e-14);
    }
}
