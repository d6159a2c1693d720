//! Dyadic partition of unity, Littlewood–Paley blocks, Besov and Sobolev
//! norms on the periodic lattice.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{fractional_laplacian, gradient, Grid, ScalarField, SpectralField};

const INNER: f64 = 0.75;
const OUTER: f64 = 8.0 / 3.0;

fn transition(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth bump supported in `(3/4, 8/3)`.
fn bump(t: f64) -> f64 {
    transition(t - INNER) * transition(OUTER - t)
}

/// `Σ_k ψ(2^{-k} t)`, summed in a fixed order so that it is exactly
/// invariant under `t → 2t`.
fn dyadic_sum(t: f64) -> f64 {
    // Only the (at most two) k with 2^{-k} t ∈ (3/4, 8/3) contribute.
    let lo = (t / OUTER).log2().floor() as i32;
    let hi = (t / INNER).log2().ceil() as i32;
    let mut terms: Vec<f64> = (lo..=hi).map(|k| t * 2f64.powi(-k)).filter(|&s| s > INNER && s < OUTER).collect();
    terms.sort_by(f64::total_cmp);
    terms.into_iter().map(bump).sum()
}

/// Radial profile `φ(t) = ψ(t) / Σ_k ψ(2^{-k} t)`.
pub fn phi(t: f64) -> f64 {
    let b = bump(t);
    if b == 0.0 {
        0.0
    } else {
        b / dyadic_sum(t)
    }
}

/// Low-frequency cap `χ(t) = 1 − Σ_{j≥0} φ(2^{-j} t)`.
pub fn chi(t: f64) -> f64 {
    if t <= INNER {
        return 1.0;
    }
    if t >= 4.0 / 3.0 {
        return 0.0;
    }
    // For 3/4 < t < 4/3 only j = 0 contributes.
    1.0 - phi(t)
}

/// Block symbols on one grid. Block `-1` is the low-frequency cap; in the
/// homogeneous family all `j` with a nonzero symbol on the lattice occur.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: Grid,
    norms: Vec<f64>,
    min_block: i32,
    max_block: i32,
}

impl DyadicPartition {
    pub fn new(grid: Grid) -> Result<Self> {
        if grid.n() < 4 {
            return Err(Error::InvalidGrid(format!("n = {} cannot host a dyadic annulus", grid.n())));
        }
        let norms: Vec<f64> = (0..grid.len())
            .map(|i| {
                let k = grid.wavevector(i);
                (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
            })
            .collect();
        let kmin = grid.dk();
        let kmax = norms.iter().copied().fold(0.0, f64::max);
        let min_block = (kmin / OUTER).log2().floor() as i32;
        let max_block = (kmax / INNER).log2().ceil() as i32;
        Ok(Self { grid, norms, min_block, max_block })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Range of homogeneous block indices that can be nonzero on the lattice.
    pub fn homogeneous_range(&self) -> (i32, i32) {
        (self.min_block, self.max_block)
    }

    /// Nonhomogeneous blocks run over `-1..=max`.
    pub fn inhomogeneous_range(&self) -> (i32, i32) {
        (-1, self.max_block.max(0))
    }

    fn check_block(&self, j: i32, homogeneous: bool) -> Result<()> {
        let (lo, hi) = if homogeneous { self.homogeneous_range() } else { self.inhomogeneous_range() };
        if j < lo || j > hi {
            return Err(Error::BlockOutOfRange { j, min: lo, max: hi });
        }
        Ok(())
    }

    /// Symbol of block `j` at flat index `i`.
    pub fn symbol(&self, j: i32, homogeneous: bool, i: usize) -> f64 {
        let t = self.norms[i];
        if t == 0.0 {
            return if !homogeneous && j == -1 { 1.0 } else { 0.0 };
        }
        if !homogeneous && j == -1 {
            chi(t)
        } else {
            phi(t * 2f64.powi(-j))
        }
    }

    /// Largest deviation from one of `χ + Σ_{j≥0} φ_j` (inhomogeneous) or of
    /// `Σ_j φ_j` away from the origin (homogeneous) over the lattice.
    pub fn partition_residual(&self, homogeneous: bool) -> f64 {
        let (lo, hi) = if homogeneous { self.homogeneous_range() } else { self.inhomogeneous_range() };
        (0..self.grid.len())
            .filter(|&i| !(homogeneous && self.norms[i] == 0.0))
            .map(|i| {
                let s: f64 = (lo..=hi).map(|j| self.symbol(j, homogeneous, i)).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Spectral block `Δ_j f` (or `Δ̇_j f`).
    pub fn block_spectral(&self, f: &SpectralField, j: i32, homogeneous: bool) -> Result<SpectralField> {
        self.grid.check_same(f.grid())?;
        self.check_block(j, homogeneous)?;
        Ok(f.map_real(|i| self.symbol(j, homogeneous, i)))
    }

    pub fn block(&self, f: &ScalarField, j: i32, homogeneous: bool) -> Result<ScalarField> {
        Ok(self.block_spectral(&f.transform(), j, homogeneous)?.inverse())
    }

    /// Per-block `L^p` norms.
    pub fn profile(&self, f: &ScalarField, s: f64, p: f64, r: f64, homogeneous: bool) -> Result<BesovProfile> {
        check_exponent("p", p)?;
        check_exponent("r", r)?;
        self.grid.check_same(f.grid())?;
        let mut hat = f.transform();
        let mean = hat.zero_mode().re;
        let mean_removed = homogeneous && mean.abs() > 1e-14 * f.max_abs().max(1e-300);
        if homogeneous {
            hat.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        }
        let (lo, hi) = if homogeneous { self.homogeneous_range() } else { self.inhomogeneous_range() };
        let blocks =
            (lo..=hi).map(|j| (j, hat.map_real(|i| self.symbol(j, homogeneous, i)).inverse().lp_norm(p))).collect();
        Ok(BesovProfile { s, p, r, homogeneous, mean_removed, blocks })
    }

    pub fn besov_norm(&self, f: &ScalarField, s: f64, p: f64, r: f64, homogeneous: bool) -> Result<BesovNorm> {
        let prof = self.profile(f, s, p, r, homogeneous)?;
        Ok(BesovNorm { value: prof.norm(), mean_removed: prof.mean_removed })
    }
}

fn check_exponent(name: &str, v: f64) -> Result<()> {
    if v >= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must lie in [1, inf], got {v}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovNorm {
    pub value: f64,
    /// The field had a nonzero mean, which the homogeneous norm ignores.
    pub mean_removed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovProfile {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub homogeneous: bool,
    pub mean_removed: bool,
    /// `(j, ‖Δ_j f‖_{L^p})`.
    pub blocks: Vec<(i32, f64)>,
}

impl BesovProfile {
    /// `‖Δ_{-1} f‖ + ‖(2^{js}‖Δ_j f‖)_{j≥0}‖_{ℓ^r}` or the homogeneous
    /// `‖(2^{js}‖Δ̇_j f‖)_j‖_{ℓ^r}`.
    pub fn norm(&self) -> f64 {
        let weighted = self
            .blocks
            .iter()
            .filter(|(j, _)| self.homogeneous || *j >= 0)
            .map(|&(j, b)| 2f64.powf(j as f64 * self.s) * b);
        let tail = if self.r.is_infinite() {
            weighted.fold(0.0, f64::max)
        } else {
            weighted.map(|w| w.powf(self.r)).sum::<f64>().powf(1.0 / self.r)
        };
        let low = if self.homogeneous { 0.0 } else { self.blocks.iter().find(|(j, _)| *j == -1).map_or(0.0, |b| b.1) };
        low + tail
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,block_norm\n");
        for (j, b) in &self.blocks {
            out.push_str(&format!("{j},{b:e}\n"));
        }
        out
    }
}

/// `Σ_{|β|≤m} Π_i x_i^{β_i}` for `x_i = k_i²`: complete homogeneous
/// symmetric polynomials of degrees `0..=m`, summed.
fn multi_index_weight(k2: &[f64], m: u32) -> f64 {
    // h[d] after processing variables 0..i
    let mut h = vec![0.0; m as usize + 1];
    h[0] = 1.0;
    for &x in k2 {
        for d in 1..=m as usize {
            h[d] += x * h[d - 1];
        }
    }
    h.iter().sum()
}

/// Per-mode weights `Σ_{|β|≤m} k^{2β}` of the `H^m` norm.
pub fn sobolev_weights(grid: &Grid, m: u32) -> Vec<f64> {
    (0..grid.len())
        .map(|i| {
            let k = grid.wavevector(i);
            let k2: Vec<f64> = k[..grid.dim()].iter().map(|v| v * v).collect();
            multi_index_weight(&k2, m)
        })
        .collect()
}

/// `‖f‖_{H^m}² = Σ_{|β|≤m} ‖D^β f‖²_{L²}` for integer `m`.
pub fn sobolev_norm(f: &ScalarField, m: u32) -> f64 {
    sobolev_norm_spectral(&f.transform(), m)
}

pub fn sobolev_norm_spectral(f: &SpectralField, m: u32) -> f64 {
    let g = *f.grid();
    let w = sobolev_weights(&g, m);
    let s: f64 = f.coeffs().iter().zip(&w).map(|(c, w)| c.norm_sqr() * w).sum();
    (s * g.volume()).sqrt()
}

/// Bessel-potential norm `‖(1 + |k|²)^{s/2} f̂‖`, defined for real `s`.
pub fn bessel_norm(f: &SpectralField, s: f64) -> f64 {
    let g = *f.grid();
    let sum: f64 = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = g.wavevector(i);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            c.norm_sqr() * (1.0 + k2).powf(s)
        })
        .sum();
    (sum * g.volume()).sqrt()
}

/// The direct `H^m` norm next to its `B^m_{2,2}` counterpart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevComparison {
    pub direct: f64,
    pub besov: f64,
}

pub fn sobolev_both(partition: &DyadicPartition, f: &ScalarField, m: u32) -> Result<SobolevComparison> {
    // ℓ² over all blocks, the low block included.
    let prof = partition.profile(f, m as f64, 2.0, 2.0, false)?;
    let sq: f64 = prof
        .blocks
        .iter()
        .map(|&(j, b)| if j < 0 { b * b } else { (2f64.powf(j as f64 * m as f64) * b).powi(2) })
        .sum();
    Ok(SobolevComparison { direct: sobolev_norm(f, m), besov: sq.sqrt() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernsteinReport {
    pub j: i32,
    /// `max_i ‖∂_i f‖_{L²} / (2^j ‖f‖_{L²})`.
    pub ratio_l2: f64,
    /// Same with grid-`L^∞` norms.
    pub ratio_linf: f64,
    /// `‖Λ^{1/2} f‖_{L²} / (2^{j/2} ‖f‖_{L²})`.
    pub ratio_half: f64,
    pub constant: f64,
    pub pass: bool,
    /// The input block was zero; nothing was checked.
    pub skipped: bool,
}

/// Bernstein ratios for a field spectrally supported in block `j`.
pub fn bernstein_check(f: &ScalarField, j: i32) -> Result<BernsteinReport> {
    let g = *f.grid();
    let c = 8.0 / 3.0 * (g.dim() as f64).sqrt();
    let hat = f.transform();
    let l2 = f.lp_norm(2.0);
    if l2 == 0.0 || f.max_abs() == 0.0 {
        return Ok(BernsteinReport {
            j,
            ratio_l2: 0.0,
            ratio_linf: 0.0,
            ratio_half: 0.0,
            constant: c,
            pass: true,
            skipped: true,
        });
    }
    let scale = 2f64.powi(j);
    let grads: Vec<ScalarField> = gradient(&hat)?.iter().map(SpectralField::inverse).collect();
    let ratio_l2 = grads.iter().map(|d| d.lp_norm(2.0)).fold(0.0, f64::max) / (scale * l2);
    let ratio_linf = grads.iter().map(ScalarField::max_abs).fold(0.0, f64::max) / (scale * f.max_abs());
    let mut centered = hat.clone();
    centered.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    let half = fractional_laplacian(&centered, 0.5)?.inverse().lp_norm(2.0);
    let ratio_half = half / (scale.sqrt() * l2);
    let within = |r: f64| r >= 1.0 / c && r <= c;
    let pass = within(ratio_l2) && within(ratio_linf) && within(ratio_half);
    Ok(BernsteinReport { j, ratio_l2, ratio_linf, ratio_half, constant: c, pass, skipped: false })
}

/// Reverse Hölder comparison for a block-`j` field:
/// `‖f‖_{L^q} / (2^{j·dim·(1/p − 1/q)} ‖f‖_{L^p})`, expected within
/// `[1/slack, slack]`. Only a heuristic: the true constants are not known.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LebesgueComparison {
    pub ratio: f64,
    pub slack: f64,
    pub within_band: bool,
}

pub fn lebesgue_comparison(f: &ScalarField, j: i32, p: f64, q: f64) -> Result<LebesgueComparison> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let dim = f.grid().dim() as f64;
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    let denom = 2f64.powf(j as f64 * dim * (inv(p) - inv(q))) * f.lp_norm(p);
    let ratio = if denom == 0.0 { 0.0 } else { f.lp_norm(q) / denom };
    let slack = 10.0;
    Ok(LebesgueComparison { ratio, slack, within_band: ratio >= 1.0 / slack && ratio <= slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random_field;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cos8() -> ScalarField {
        ScalarField::from_fn(Grid::periodic(2, 64).unwrap(), |x| (8.0 * x[0]).cos()).unwrap()
    }

    #[test]
    fn profile_values() {
        assert_eq!(phi(0.5), 0.0);
        assert_eq!(phi(3.0), 0.0);
        assert!((chi(1.0) + phi(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(phi(1.0 / 4.0), 0.0);
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(2.0), 0.0);
        for t in [0.8, 1.1, 1.7, 2.5] {
            let s: f64 = (-3..=3).map(|k| phi(t * 2f64.powi(-k))).sum();
            assert!((s - 1.0).abs() < 1e-14, "{t}");
        }
    }

    #[test]
    fn partition_of_unity_on_lattices() {
        for (dim, n, l) in [(2, 32, 2.0 * PI), (3, 16, 2.0 * PI), (2, 24, 3.7)] {
            let p = DyadicPartition::new(Grid::new(dim, n, l).unwrap()).unwrap();
            assert!(p.partition_residual(false) < 1e-12);
            assert!(p.partition_residual(true) < 1e-12);
        }
    }

    #[test]
    fn cosine_blocks() {
        let f = cos8();
        let p = DyadicPartition::new(*f.grid()).unwrap();
        let (lo, hi) = p.inhomogeneous_range();
        let mut sum = ScalarField::zeros(*f.grid());
        for j in lo..=hi {
            let b = p.block(&f, j, false).unwrap();
            let nonzero = b.max_abs() > 1e-12;
            assert_eq!(nonzero, j == 2 || j == 3, "j = {j}");
            sum =
                ScalarField::new(*f.grid(), sum.values().iter().zip(b.values()).map(|(a, b)| a + b).collect()).unwrap();
        }
        assert!(sum.sub(&f).unwrap().max_abs() < 1e-12);
        assert!(p.block(&f, hi + 1, false).is_err());
        assert!(p.block(&f, -2, false).is_err());
        let c = ScalarField::from_fn(*f.grid(), |_| 2.0).unwrap();
        let (hl, hh) = p.homogeneous_range();
        for j in hl..=hh {
            assert_eq!(p.block(&c, j, true).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn sobolev_of_cosine() {
        let f = cos8();
        // ∫∫ cos²(8x) = 2π·π in 2-D; the x₂ direction contributes a factor 2π.
        let h1 = sobolev_norm(&f, 1);
        assert!((h1 * h1 - 65.0 * PI * 2.0 * PI).abs() < 1e-9);
        let zero = ScalarField::zeros(*f.grid());
        assert_eq!(sobolev_norm(&zero, 3), 0.0);
        let p = DyadicPartition::new(*f.grid()).unwrap();
        assert_eq!(p.besov_norm(&zero, 1.0, 2.0, 2.0, false).unwrap().value, 0.0);
        let hat = f.transform();
        assert!((bessel_norm(&hat, 1.0) - h1).abs() < 1e-9);
        // Mixed derivatives enter the multi-index sum.
        let g = ScalarField::from_fn(*f.grid(), |x| (x[0] + x[1]).cos()).unwrap();
        let h2 = sobolev_norm(&g, 2);
        // weights 1 + (1 + 1) + (1 + 1 + 1) = 6
        assert!((h2 * h2 - 6.0 * 2.0 * PI * PI).abs() < 1e-9);
    }

    #[test]
    fn bernstein_exact_for_single_frequency() {
        let f = cos8();
        let p = DyadicPartition::new(*f.grid()).unwrap();
        let rep = bernstein_check(&p.block(&f, 3, false).unwrap(), 3).unwrap();
        assert!(rep.pass);
        // The j = 3 block of cos(8x) is φ(1)·cos(8x): ratios are exactly 1.
        assert!((rep.ratio_l2 - 1.0).abs() < 1e-12);
        assert!((rep.ratio_linf - 1.0).abs() < 1e-12);
        assert!((rep.ratio_half - 1.0).abs() < 1e-12);
        let zero = bernstein_check(&ScalarField::zeros(*f.grid()), 3).unwrap();
        assert!(zero.skipped);
    }

    #[test]
    fn bernstein_two_modes() {
        let g = Grid::periodic(2, 64).unwrap();
        let f = ScalarField::from_fn(g, |x| (7.0 * x[0]).cos() + 0.5 * (5.0 * x[1] + 4.0 * x[0]).sin()).unwrap();
        let p = DyadicPartition::new(g).unwrap();
        let b = p.block(&f, 3, false).unwrap();
        let rep = bernstein_check(&b, 3).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn lebesgue_band_on_block() {
        let g = Grid::periodic(2, 64).unwrap();
        let p = DyadicPartition::new(g).unwrap();
        let f = random_field(g, 3, |_| 1.0).inverse();
        let b = p.block(&f, 3, false).unwrap();
        let c = lebesgue_comparison(&b, 3, 2.0, f64::INFINITY).unwrap();
        assert!(c.ratio > 0.0);
        assert!(lebesgue_comparison(&b, 3, 0.5, 2.0).is_err());
    }

    fn field(seed: u64) -> ScalarField {
        random_field(Grid::periodic(2, 32).unwrap(), seed, |k| (1.0 + k * k).powf(-1.0)).inverse()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]

        #[test]
        fn besov_embedding_in_r(seed in 0u64..10_000, s in -1.0f64..2.0) {
            let f = field(seed);
            let p = DyadicPartition::new(*f.grid()).unwrap();
            let mut prev = f64::INFINITY;
            for r in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
                let v = p.besov_norm(&f, s, 2.0, r, false).unwrap().value;
                prop_assert!(v <= prev * (1.0 + 1e-12));
                prev = v;
            }
        }

        #[test]
        fn parseval_band(seed in 0u64..10_000) {
            let f = field(seed);
            let p = DyadicPartition::new(*f.grid()).unwrap();
            let prof = p.profile(&f, 0.0, 2.0, 2.0, true).unwrap();
            let sum: f64 = prof.blocks.iter().map(|b| b.1 * b.1).sum();
            let total = f.lp_norm(2.0).powi(2);
            prop_assert!(sum >= total / 3.0 && sum <= 3.0 * total);
        }

        #[test]
        fn sobolev_routes_agree(seed in 0u64..10_000, m in 0u32..3) {
            let f = field(seed);
            let p = DyadicPartition::new(*f.grid()).unwrap();
            let c = sobolev_both(&p, &f, m).unwrap();
            prop_assert!(c.besov >= c.direct / 4.0 && c.besov <= 4.0 * c.direct, "{:?}", c);
        }

        #[test]
        fn besov_is_homogeneous(seed in 0u64..10_000, c in -5.0f64..5.0) {
            let f = field(seed);
            let p = DyadicPartition::new(*f.grid()).unwrap();
            for (s, pp, r, h) in [(0.5, 2.0, 2.0, false), (1.0, f64::INFINITY, 1.0, true), (-0.5, 3.0, f64::INFINITY, false)] {
                let a = p.besov_norm(&f, s, pp, r, h).unwrap().value;
                let b = p.besov_norm(&f.scale(c), s, pp, r, h).unwrap().value;
                prop_assert!((b - c.abs() * a).abs() <= 1e-12 * a.max(1e-300) * c.abs().max(1.0));
            }
        }

        #[test]
        fn bernstein_on_random_blocks(seed in 0u64..10_000, j in 1i32..4) {
            let g = Grid::periodic(2, 64).unwrap();
            let p = DyadicPartition::new(g).unwrap();
            let f = random_field(g, seed, |_| 1.0).inverse();
            let rep = bernstein_check(&p.block(&f, j, false).unwrap(), j).unwrap();
            prop_assert!(rep.pass, "{:?}", rep);
        }
    }
}
