//! Globally adaptive Gauss–Kronrod (10/21) quadrature.
//!
//! Intervals are bisected in order of decreasing error estimate until the
//! summed estimate falls below `max(abs_tol, rel_tol·|I|)`. Error estimates
//! follow the QUADPACK `qk21` heuristic, including its round-off floor.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-11, rel_tol: 1e-12, max_intervals: 4000 }
    }
}

/// Value and estimated absolute error of an integral.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl std::ops::Add for Integral {
    type Output = Integral;
    fn add(self, o: Integral) -> Integral {
        Integral {
            value: self.value + o.value,
            error: self.error + o.error,
            evaluations: self.evaluations + o.evaluations,
        }
    }
}

impl std::ops::Mul<f64> for Integral {
    type Output = Integral;
    fn mul(self, s: f64) -> Integral {
        Integral { value: self.value * s, error: self.error * s.abs(), evaluations: self.evaluations }
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

fn gk21(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut result_gauss = 0.0;
    let mut result_kronrod = fc * WGK[10];
    let mut resabs = result_kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        result_kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = result_kronrod * 0.5;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = result_kronrod * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((result_kronrod - result_gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

/// Integrates `f` over the finite interval `[a, b]`.
///
/// The integrand is never evaluated at the endpoints, so integrable endpoint
/// singularities are allowed.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> Result<Integral> {
    integrate_breaks(f, &[a, b], opts)
}

/// Integrates over `[points[0], points[last]]`, starting from the partition
/// given by `points` so that kinks of the integrand sit on interval ends.
pub fn integrate_breaks(f: impl Fn(f64) -> f64, points: &[f64], opts: &QuadOptions) -> Result<Integral> {
    let mut pts: Vec<f64> = points.to_vec();
    pts.dedup_by(|a, b| a == b);
    if pts.len() < 2 {
        return Ok(Integral::default());
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a >= b {
            if a > b {
                return Err(Error::param(format!("breakpoints not increasing: {a} > {b}")));
            }
            continue;
        }
        let (value, error) = gk21(&f, a, b);
        evaluations += 21;
        total += value;
        total_err += error;
        heap.push(Piece { a, b, value, error });
    }
    if !total.is_finite() {
        return Err(Error::Quadrature { a: pts[0], b: *pts.last().unwrap(), error: f64::INFINITY });
    }

    while total_err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature { a: pts[0], b: *pts.last().unwrap(), error: total_err });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine precision; accept its estimate.
            heap.push(Piece { error: 0.0, ..worst });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        evaluations += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        if !total.is_finite() {
            return Err(Error::Quadrature { a: worst.a, b: worst.b, error: f64::INFINITY });
        }
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed drift from the running updates.
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum::<f64>().max(0.0);
    Ok(Integral { value, error, evaluations })
}

/// `∫_x^∞ g(η) η^{-1-p} dη` for `p > 0`.
///
/// Substituting `η = x s^{-1/p}` gives `(x^{-p}/p) ∫_0^1 g(x s^{-1/p}) ds`,
/// a bounded-interval integral that is finite whenever `g` grows slower
/// than `η^p`. `kinks` are points `η > x` where `g` is not smooth.
pub fn integrate_power_tail(
    g: impl Fn(f64) -> f64,
    x: f64,
    p: f64,
    kinks: &[f64],
    opts: &QuadOptions,
) -> Result<Integral> {
    if !(x > 0.0 && p > 0.0) {
        return Err(Error::param(format!("power tail needs x > 0 and p > 0, got x={x}, p={p}")));
    }
    let prefactor = x.powf(-p) / p;
    let mut pts = vec![0.0];
    let mut ks: Vec<f64> = kinks.iter().filter(|&&k| k > x).map(|&k| (x / k).powf(p)).collect();
    ks.sort_by(f64::total_cmp);
    pts.extend(ks.into_iter().filter(|&s| s > 0.0 && s < 1.0));
    pts.push(1.0);
    let inner = integrate_breaks(
        |s| {
            let eta = (x * s.powf(-1.0 / p)).min(1e300);
            g(eta)
        },
        &pts,
        &QuadOptions { abs_tol: opts.abs_tol / prefactor.max(1e-300), ..*opts },
    )?;
    Ok(inner * prefactor)
}
