//! Moduli of sampled fields: pair scans against a given modulus and the
//! exact grid modulus with its concave majorant.

use serde::{Deserialize, Serialize};

use super::modulus::{Extrapolation, ModulusOfContinuity, TabulatedModulus};
use crate::error::Result;
use crate::rng::SplitMix64;
use crate::spectral::{Grid, ScalarField};

/// Worst value of `|θ(x) − θ(y)| − ω(d(x, y))` over the scanned pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MocViolation {
    pub worst_excess: f64,
    pub pair: (usize, usize),
    pub distance: f64,
    pub pairs_checked: usize,
    pub violated: bool,
}

impl MocViolation {
    fn empty() -> Self {
        Self { worst_excess: f64::NEG_INFINITY, pair: (0, 0), distance: 0.0, pairs_checked: 0, violated: false }
    }

    fn consider(&mut self, grid: &Grid, values: &[f64], omega: &ModulusOfContinuity, a: usize, b: usize) {
        let d = grid.periodic_distance(a, b);
        let excess = (values[a] - values[b]).abs() - omega.eval(d);
        self.pairs_checked += 1;
        if excess > self.worst_excess {
            self.worst_excess = excess;
            self.pair = (a, b);
            self.distance = d;
        }
    }
}

/// Scans `n_pairs` seeded random pairs plus every nearest-neighbour pair.
pub fn field_moc_check(theta: &ScalarField, omega: &ModulusOfContinuity, n_pairs: usize, seed: u64) -> MocViolation {
    let grid = *theta.grid();
    let v = theta.values();
    let total = grid.len();
    let mut out = MocViolation::empty();
    let mut rng = SplitMix64::new(seed);
    for _ in 0..n_pairs {
        let a = rng.next_below(total);
        let b = rng.next_below(total);
        if a != b {
            out.consider(&grid, v, omega, a, b);
        }
    }
    let n = grid.n();
    for a in 0..total {
        let idx = grid.unflatten(a);
        for axis in 0..grid.dim() {
            let mut j = idx;
            j[axis] = (j[axis] + 1) % n;
            out.consider(&grid, v, omega, a, grid.flatten(&j[..grid.dim()]));
        }
    }
    out.violated = out.worst_excess > 0.0;
    out
}

/// For every displacement class `|m|²` (in grid units, min-image), the
/// largest `|θ(x + m h) − θ(x)|`. Returns `(distance, max increment)` pairs
/// sorted by distance.
pub fn displacement_increments(theta: &ScalarField) -> Vec<(f64, f64)> {
    let grid = *theta.grid();
    let (n, dim) = (grid.n(), grid.dim());
    let v = theta.values();
    let rows = grid.len() / n;
    let h = grid.spacing();
    let half = n / 2;
    let mut best: std::collections::BTreeMap<i64, f64> = std::collections::BTreeMap::new();

    for disp in 1..grid.len() {
        let m = grid.mode(disp);
        // Each displacement and its negation give the same set of pairs.
        let neg = grid.conjugate_index(disp);
        if neg < disp {
            continue;
        }
        let dl = disp % n;
        let lead = grid.unflatten(disp);
        let mut worst = 0.0f64;
        for row in 0..rows {
            let src = row * n;
            let dst = if dim == 2 {
                ((row + lead[0]) % n) * n
            } else {
                let (i, j) = (row / n, row % n);
                (((i + lead[0]) % n) * n + (j + lead[1]) % n) * n
            };
            let (a, b) = (&v[src..src + n], &v[dst..dst + n]);
            for c in 0..n - dl {
                worst = worst.max((b[c + dl] - a[c]).abs());
            }
            for c in n - dl..n {
                worst = worst.max((b[c + dl - n] - a[c]).abs());
            }
        }
        let key: i64 = m[..dim].iter().map(|&k| k * k).sum();
        debug_assert!(m[..dim].iter().all(|&k| k.unsigned_abs() as usize <= half));
        let e = best.entry(key).or_insert(0.0);
        *e = e.max(worst);
    }
    best.into_iter().map(|(k, w)| (h * (k as f64).sqrt(), w)).collect()
}

/// Least concave nondecreasing majorant through the origin, flat after the
/// largest value.
pub fn concave_majorant(points: &[(f64, f64)]) -> Result<TabulatedModulus> {
    let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 > 0.0).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let peak = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    if pts.is_empty() || peak <= 0.0 {
        let x = pts.last().map_or(1.0, |p| p.0);
        return TabulatedModulus::new(vec![0.0, x], vec![0.0, 0.0], Extrapolation::Constant);
    }
    let stop = pts.iter().position(|p| p.1 == peak).expect("peak exists");
    let mut hull: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for &p in &pts[..=stop] {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop `a` if it lies on or below the chord from `o` to `p`.
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let (xs, ys) = hull.into_iter().unzip();
    TabulatedModulus::new(xs, ys, Extrapolation::Constant)
}

/// The smallest concave modulus dominating every grid pair of `theta`.
pub fn exhaustive_modulus(theta: &ScalarField) -> Result<ModulusOfContinuity> {
    Ok(ModulusOfContinuity::Tabulated(concave_majorant(&displacement_increments(theta))?))
}

/// `max_{x≠y} |θ(x) − θ(y)| − ω(d(x,y))` over all grid pairs, with the
/// distance where it is attained.
pub fn moc_margin(increments: &[(f64, f64)], omega: &ModulusOfContinuity) -> (f64, f64) {
    increments.iter().map(|&(d, m)| (m - omega.eval(d), d)).fold((f64::NEG_INFINITY, 0.0), |best, cur| {
        if cur.0 > best.0 {
            cur
        } else {
            best
        }
    })
}
