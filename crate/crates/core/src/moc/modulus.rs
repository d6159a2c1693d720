use serde::{Deserialize, Serialize};

use super::params::MocParameters;
use crate::error::{Error, Result};

/// How a tabulated modulus continues past its last node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extrapolation {
    Constant,
    Linear,
}

/// Piecewise-linear modulus through nodes `(0,0), (x₁,y₁), …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedModulus {
    xs: Vec<f64>,
    ys: Vec<f64>,
    extrapolation: Extrapolation,
}

impl TabulatedModulus {
    /// Nodes must start at the origin, have increasing abscissae,
    /// nondecreasing values and nonincreasing segment slopes.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, extrapolation: Extrapolation) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::param("tabulated modulus needs at least two matching nodes"));
        }
        if xs[0] != 0.0 || ys[0] != 0.0 {
            return Err(Error::param("tabulated modulus must start at (0, 0)"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::param("tabulated modulus has non-finite nodes"));
        }
        let mut last_slope = f64::INFINITY;
        for i in 1..xs.len() {
            let dx = xs[i] - xs[i - 1];
            if dx <= 0.0 {
                return Err(Error::param(format!("abscissae not increasing at node {i}")));
            }
            let slope = (ys[i] - ys[i - 1]) / dx;
            if slope < 0.0 {
                return Err(Error::param(format!("modulus decreases on segment {i}")));
            }
            if slope > last_slope * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::param(format!("modulus not concave at node {}", i - 1)));
            }
            last_slope = slope;
        }
        Ok(Self { xs, ys, extrapolation })
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    pub fn extrapolation(&self) -> Extrapolation {
        self.extrapolation
    }

    fn slope(&self, i: usize) -> f64 {
        (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
    }

    fn last_slope(&self) -> f64 {
        match self.extrapolation {
            Extrapolation::Constant => 0.0,
            Extrapolation::Linear => self.slope(self.xs.len() - 2),
        }
    }

    /// Index of the segment whose left node is the largest `xᵢ ≤ x`.
    fn segment(&self, x: f64) -> usize {
        self.xs.partition_point(|&v| v <= x).saturating_sub(1)
    }

    fn eval(&self, x: f64) -> f64 {
        let last = self.xs.len() - 1;
        let i = self.segment(x);
        if i >= last {
            return self.ys[last] + self.last_slope() * (x - self.xs[last]);
        }
        self.ys[i] + self.slope(i) * (x - self.xs[i])
    }

    fn slope_at(&self, x: f64) -> f64 {
        let i = self.segment(x);
        if i + 1 >= self.xs.len() {
            self.last_slope()
        } else {
            self.slope(i)
        }
    }
}

/// A modulus of continuity: continuous, nondecreasing, concave, zero at 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModulusOfContinuity {
    /// `ξ − ξ^r` up to `δ`, then `ω(δ) + γ ln((B + ln(ξ/δ))/B)`.
    Explicit(MocParameters),
    Tabulated(TabulatedModulus),
    /// `c ξ^p` with `0 < p ≤ 1`.
    Power {
        coefficient: f64,
        exponent: f64,
    },
    /// `ω(λξ)`.
    Scaled {
        inner: Box<ModulusOfContinuity>,
        lambda: f64,
    },
}

/// `(1+t)^r + (1−t)^r − 2` for `0 ≤ t ≤ 1`, accurate for small `t`.
fn symmetric_power_difference(r: f64, t: f64) -> f64 {
    if t < 0.1 {
        let t2 = t * t;
        let mut coef = 1.0;
        let mut power = 1.0;
        let mut sum = 0.0;
        for m in 1..40 {
            let mf = m as f64;
            coef *= (r - mf + 1.0) / mf;
            if m % 2 == 0 {
                power *= t2;
                let term = 2.0 * coef * power;
                sum += term;
                if term.abs() <= 1e-18 * sum.abs() {
                    break;
                }
            }
        }
        sum
    } else {
        (r * t.ln_1p()).exp_m1() + (r * (-t).ln_1p()).exp_m1()
    }
}

/// `(b+h)^p − b^p` without cancellation.
fn power_increment(p: f64, b: f64, h: f64) -> f64 {
    if b == 0.0 {
        h.powf(p)
    } else {
        b.powf(p) * (p * (h / b).ln_1p()).exp_m1()
    }
}

impl ModulusOfContinuity {
    pub fn explicit(params: MocParameters) -> Self {
        Self::Explicit(params)
    }

    pub fn power(coefficient: f64, exponent: f64) -> Result<Self> {
        if !(coefficient > 0.0 && coefficient.is_finite() && exponent > 0.0 && exponent <= 1.0) {
            return Err(Error::param(format!(
                "power modulus needs c > 0 and 0 < p <= 1, got c={coefficient}, p={exponent}"
            )));
        }
        Ok(Self::Power { coefficient, exponent })
    }

    /// `ω(η) = min(η, 1)`.
    pub fn clipped_identity() -> Self {
        Self::Tabulated(TabulatedModulus::new(vec![0.0, 1.0], vec![0.0, 1.0], Extrapolation::Constant).unwrap())
    }

    /// `ω(η) = s·η`.
    pub fn linear(slope: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(Error::param(format!("linear modulus needs a positive slope, got {slope}")));
        }
        Ok(Self::Tabulated(TabulatedModulus::new(vec![0.0, 1.0], vec![0.0, slope], Extrapolation::Linear)?))
    }

    /// `ω_λ(ξ) = ω(λξ)`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::param(format!("scale factor must be positive, got {lambda}")));
        }
        Ok(match self {
            Self::Scaled { inner, lambda: l } => Self::Scaled { inner: inner.clone(), lambda: l * lambda },
            other => Self::Scaled { inner: Box::new(other.clone()), lambda },
        })
    }

    fn check_arg(xi: f64) -> Result<()> {
        if xi >= 0.0 {
            Ok(())
        } else {
            Err(Error::param(format!("modulus argument must be nonnegative, got {xi}")))
        }
    }

    pub fn value(&self, xi: f64) -> Result<f64> {
        Self::check_arg(xi)?;
        Ok(self.eval(xi))
    }

    /// Right derivative `ω'(ξ)`; at the crossover the left formula is used.
    pub fn derivative(&self, xi: f64) -> Result<f64> {
        Self::check_arg(xi)?;
        Ok(self.slope(xi))
    }

    /// `ω''(ξ)` away from kinks; `−∞` at a cusp, `0` on linear pieces.
    pub fn second_derivative(&self, xi: f64) -> Result<f64> {
        Self::check_arg(xi)?;
        Ok(self.curvature(xi))
    }

    pub(crate) fn eval(&self, xi: f64) -> f64 {
        match self {
            Self::Explicit(p) => {
                if xi <= p.delta() {
                    xi - xi.powf(p.r())
                } else {
                    let base = p.delta() - p.delta().powf(p.r());
                    base + p.gamma() * ((xi / p.delta()).ln() / p.b()).ln_1p()
                }
            }
            Self::Tabulated(t) => t.eval(xi),
            Self::Power { coefficient, exponent } => coefficient * xi.powf(*exponent),
            Self::Scaled { inner, lambda } => inner.eval(lambda * xi),
        }
    }

    pub(crate) fn slope(&self, xi: f64) -> f64 {
        match self {
            Self::Explicit(p) => {
                if xi <= p.delta() {
                    1.0 - p.r() * xi.powf(p.r() - 1.0)
                } else {
                    p.gamma() / (xi * (p.b() + (xi / p.delta()).ln()))
                }
            }
            Self::Tabulated(t) => t.slope_at(xi),
            Self::Power { coefficient, exponent } => {
                if *exponent == 1.0 {
                    *coefficient
                } else {
                    coefficient * exponent * xi.powf(exponent - 1.0)
                }
            }
            Self::Scaled { inner, lambda } => lambda * inner.slope(lambda * xi),
        }
    }

    pub(crate) fn curvature(&self, xi: f64) -> f64 {
        match self {
            Self::Explicit(p) => {
                if xi < p.delta() {
                    -p.r() * (p.r() - 1.0) * xi.powf(p.r() - 2.0)
                } else {
                    let l = p.b() + (xi / p.delta()).ln();
                    -p.gamma() * (l + 1.0) / (xi * xi * l * l)
                }
            }
            Self::Tabulated(_) => 0.0,
            Self::Power { coefficient, exponent } => {
                coefficient * exponent * (exponent - 1.0) * xi.powf(exponent - 2.0)
            }
            Self::Scaled { inner, lambda } => lambda * lambda * inner.curvature(lambda * xi),
        }
    }

    /// `ω(b + h) − ω(b)` for `b, h ≥ 0`, free of cancellation for small `h`.
    pub(crate) fn increment(&self, b: f64, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        match self {
            Self::Explicit(p) => {
                let d = p.delta();
                let left = |b: f64, h: f64| h - power_increment(p.r(), b, h);
                let right = |b: f64, h: f64| p.gamma() * ((h / b).ln_1p() / (p.b() + (b / d).ln())).ln_1p();
                let a = b + h;
                if a <= d {
                    left(b, h)
                } else if b >= d {
                    right(b, h)
                } else {
                    left(b, d - b) + right(d, a - d)
                }
            }
            Self::Tabulated(t) => {
                let a = b + h;
                let mut i = t.segment(b);
                let last = t.xs.len() - 1;
                if i >= last {
                    return t.last_slope() * h;
                }
                let mut total = 0.0;
                let mut lo = b;
                loop {
                    let hi = if i < last { t.xs[i + 1].min(a) } else { a };
                    let s = if i < last { t.slope(i) } else { t.last_slope() };
                    total += s * (hi - lo);
                    if hi >= a {
                        break total;
                    }
                    lo = hi;
                    i += 1;
                }
            }
            Self::Power { coefficient, exponent } => coefficient * power_increment(*exponent, b, h),
            Self::Scaled { inner, lambda } => inner.increment(lambda * b, lambda * h),
        }
    }

    /// `ω(ξ + h) + ω(ξ − h) − 2ω(ξ)` for `0 ≤ h ≤ ξ`.
    pub(crate) fn second_difference(&self, xi: f64, h: f64) -> f64 {
        match self {
            Self::Explicit(p) if xi + h <= p.delta() => -xi.powf(p.r()) * symmetric_power_difference(p.r(), h / xi),
            _ => self.increment(xi, h) - self.increment(xi - h, h),
        }
    }

    /// Points where `ω` fails to be smooth (excluding the origin).
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Self::Explicit(p) => vec![p.delta()],
            Self::Tabulated(t) => t.xs[1..].to_vec(),
            Self::Power { .. } => Vec::new(),
            Self::Scaled { inner, lambda } => inner.kinks().into_iter().map(|k| k / lambda).collect(),
        }
    }

    /// `ω'(0)`, possibly infinite.
    pub fn slope_at_zero(&self) -> f64 {
        match self {
            Self::Explicit(_) => 1.0,
            Self::Tabulated(t) => t.slope(0),
            Self::Power { coefficient, exponent } => {
                if *exponent == 1.0 {
                    *coefficient
                } else {
                    f64::INFINITY
                }
            }
            Self::Scaled { inner, lambda } => lambda * inner.slope_at_zero(),
        }
    }

    /// Exponent `q` with `ω(η) ≈ η^q` as `η → ∞`; zero for logarithmic or
    /// bounded growth.
    pub fn growth_exponent(&self) -> f64 {
        match self {
            Self::Explicit(_) => 0.0,
            Self::Tabulated(t) => {
                if t.last_slope() > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Power { exponent, .. } => *exponent,
            Self::Scaled { inner, .. } => inner.growth_exponent(),
        }
    }

    /// Checks `ω(0) = 0`, monotonicity and midpoint concavity on `grid`
    /// (sorted, positive). Returns the first offending point.
    pub fn shape_defect(&self, grid: &[f64]) -> Option<f64> {
        if self.eval(0.0) != 0.0 {
            return Some(0.0);
        }
        let mut prev = 0.0;
        for &x in grid {
            let v = self.eval(x);
            if !v.is_finite() || v < prev {
                return Some(x);
            }
            prev = v;
            let below = self.eval(0.5 * x);
            let above = self.eval(1.5 * x);
            // Midpoint concavity on [x/2, 3x/2].
            let tol = 1e-14 * v.abs().max(1e-300);
            if v < 0.5 * (below + above) - tol {
                return Some(x);
            }
        }
        None
    }
}

/// `ω_λ(ξ) = ω(λξ)`.
pub fn scale_moc(omega: &ModulusOfContinuity, lambda: f64) -> Result<ModulusOfContinuity> {
    omega.scaled(lambda)
}

/// The a priori gradient bound `‖∇θ‖_∞ ≤ ω'(0)`.
pub fn gradient_from_moc(omega: &ModulusOfContinuity) -> Result<f64> {
    let s = omega.slope_at_zero();
    if s.is_finite() {
        Ok(s)
    } else {
        Err(Error::VacuousGradientBound)
    }
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn paper() -> ModulusOfContinuity {
        ModulusOfContinuity::explicit(MocParameters::new(0.5, 1.25, 0.001, 0.1).unwrap())
    }

    #[test]
    fn explicit_values() {
        let w = paper();
        assert_eq!(w.value(0.0).unwrap(), 0.0);
        assert_eq!(w.derivative(0.0).unwrap(), 1.0);
        let v = w.value(0.05).unwrap();
        assert!((v - 0.026_356_459_774_920_606).abs() < 1e-12, "{v}");
        assert!(w.value(-1.0).is_err());
        assert!(w.second_derivative(1e-12).unwrap() < -1e6);
    }

    #[test]
    fn log_piece_matches_integrated_slope() {
        use crate::quadrature::{integrate, QuadOptions};
        let w = paper();
        for &xi in &[0.2, 1.0, 37.0, 1e4] {
            let q = integrate(|x| w.slope(x), 0.1, xi, &QuadOptions::default()).unwrap();
            let direct = w.eval(xi) - w.eval(0.1);
            assert!((q.value - direct).abs() < 1e-10, "{xi}: {} vs {direct}", q.value);
        }
    }

    #[test]
    fn increments_agree_with_differences() {
        let w = paper();
        for &(b, h) in &[(0.01, 0.02), (0.05, 0.1), (0.2, 0.3), (0.0, 0.3), (1.0, 1e-3)] {
            let naive = w.eval(b + h) - w.eval(b);
            assert!((w.increment(b, h) - naive).abs() < 1e-15, "{b} {h}");
        }
        let t = ModulusOfContinuity::Tabulated(
            TabulatedModulus::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 3.0], Extrapolation::Constant).unwrap(),
        );
        assert!((t.increment(0.5, 3.0) - (3.0 - 1.0)).abs() < 1e-15);
        assert!((t.increment(0.5, 0.25) - 0.5).abs() < 1e-15);
        assert_eq!(t.increment(4.0, 1.0), 0.0);
        let sd = paper().second_difference(0.01, 1e-9);
        let exact = -1.25 * 0.25 * 0.01f64.powf(-0.75) * 1e-18;
        assert!((sd - exact).abs() < 1e-6 * exact.abs(), "{sd} vs {exact}");
    }

    #[test]
    fn tabulated_rules() {
        let bad = TabulatedModulus::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0], Extrapolation::Constant);
        assert!(bad.is_err());
        assert!(TabulatedModulus::new(vec![0.1, 1.0], vec![0.0, 1.0], Extrapolation::Constant).is_err());
        let w = ModulusOfContinuity::clipped_identity();
        assert_eq!(w.value(0.5).unwrap(), 0.5);
        assert_eq!(w.value(7.0).unwrap(), 1.0);
        assert_eq!(w.value(1.0).unwrap(), 1.0);
        let l = ModulusOfContinuity::linear(2.0).unwrap();
        assert_eq!(l.value(5.0).unwrap(), 10.0);
        assert_eq!(gradient_from_moc(&l).unwrap(), 2.0);
    }

    #[test]
    fn scaling_and_gradient_bound() {
        let w = paper();
        assert_eq!(scale_moc(&w, 1.0).unwrap().value(0.3).unwrap(), w.value(0.3).unwrap());
        assert_eq!(gradient_from_moc(&w).unwrap(), 1.0);
        assert_eq!(gradient_from_moc(&scale_moc(&w, 2.0).unwrap()).unwrap(), 2.0);
        let w3 = scale_moc(&w, 3.0).unwrap();
        assert_eq!(gradient_from_moc(&w3).unwrap(), 3.0);
        assert_eq!(gradient_from_moc(&scale_moc(&w3, 2.0).unwrap()).unwrap(), 6.0);
        assert!(scale_moc(&w, 0.0).is_err());
        let root = ModulusOfContinuity::power(1.0, 0.5).unwrap();
        assert!(matches!(gradient_from_moc(&root), Err(Error::VacuousGradientBound)));
        assert!(w3.shape_defect(&log_grid(1e-8, 1e4, 200)).is_none());
    }

    fn params() -> impl Strategy<Value = MocParameters> {
        (0.02f64..0.98, 0.01f64..0.99, 1f64..30.0, 0.01f64..0.99).prop_map(|(a, rf, dl, gf)| {
            let delta = 2f64.powf(-dl);
            MocParameters::new(a, 1.0 + rf * a, gf * delta, delta).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn explicit_is_a_modulus(p in params()) {
            let w = ModulusOfContinuity::explicit(p);
            let d = p.delta();
            let left = d - d.powf(p.r());
            let right = w.eval(d * (1.0 + 1e-15));
            prop_assert!((left - right).abs() <= 1e-14 * left.abs().max(1e-300) + 1e-13 * d);
            // The shape checks need the slope drop at the crossover,
            // which holds once δ is small.
            if p.delta_is_small() {
                prop_assert_eq!(w.shape_defect(&log_grid(1e-8, 1e4, 200)), None);
            }
        }

        #[test]
        fn scaled_stays_concave(p in params(), lambda in 0.01f64..100.0) {
            if !p.delta_is_small() { return Ok(()); }
            let w = ModulusOfContinuity::explicit(p).scaled(lambda).unwrap();
            prop_assert_eq!(w.shape_defect(&log_grid(1e-8, 1e4, 200)), None);
        }
    }
}
