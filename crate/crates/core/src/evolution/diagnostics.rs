use std::fmt::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::Transport;
use crate::error::Result;
use crate::littlewood_paley::bessel_norm;
use crate::spectral::{fractional_laplacian, gradient, Grid, ScalarField, SpectralField};

/// Supremum of `|θ|` for the trigonometric interpolant of the grid data.
///
/// Grid maxima undersample a moving peak, which is enough to break a
/// maximum-principle check at the 1e-6 level. Starting from the largest grid
/// extrema, Newton's method on the exact trigonometric sum locates the
/// continuous extremum. Never below the grid maximum.
pub fn interpolant_sup(theta: &SpectralField) -> f64 {
    let grid = *theta.grid();
    let dim = grid.dim();
    let values = theta.inverse().into_values();
    let floor = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if floor == 0.0 {
        return 0.0;
    }
    let cutoff = floor * 1e-17;
    let modes: Vec<([f64; 3], Complex64)> = theta
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > cutoff)
        .map(|(i, c)| (grid.wavevector(i), *c))
        .collect();

    let mut candidates: Vec<usize> = (0..grid.len()).filter(|&i| is_local_extremum(&grid, &values, i)).collect();
    candidates.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()));
    candidates.truncate(8);

    let mut best = floor;
    for start in candidates {
        let sign = values[start].signum();
        let mut x = grid.position(start);
        let mut current = sign * values[start];
        for _ in 0..20 {
            let (v, g, h) = eval_with_derivatives(&modes, x, dim);
            let (v, g, h) = (sign * v, g.map(|c| sign * c), h.map(|r| r.map(|c| sign * c)));
            current = current.max(v);
            let step = newton_step(&g, &h, dim).unwrap_or_else(|| g.map(|c| c * 1e-3));
            let len = step[..dim].iter().map(|s| s * s).sum::<f64>().sqrt();
            let scale = if len > grid.spacing() { grid.spacing() / len } else { 1.0 };
            for d in 0..dim {
                x[d] += step[d] * scale;
            }
            if len < 1e-13 {
                break;
            }
        }
        current = current.max(sign * eval_with_derivatives(&modes, x, dim).0);
        best = best.max(current);
    }
    best
}

fn is_local_extremum(grid: &Grid, values: &[f64], i: usize) -> bool {
    let n = grid.n();
    let idx = grid.unflatten(i);
    let v = values[i].abs();
    let s = values[i].signum();
    (0..grid.dim()).all(|axis| {
        [1, n - 1].iter().all(|&off| {
            let mut j = idx;
            j[axis] = (j[axis] + off) % n;
            let w = values[grid.flatten(&j[..grid.dim()])];
            s * w <= v
        })
    })
}

type Hessian = [[f64; 3]; 3];

fn eval_with_derivatives(modes: &[([f64; 3], Complex64)], x: [f64; 3], dim: usize) -> (f64, [f64; 3], Hessian) {
    let mut v = 0.0;
    let mut g = [0.0; 3];
    let mut h = [[0.0; 3]; 3];
    for (k, c) in modes {
        let phase: f64 = (0..dim).map(|d| k[d] * x[d]).sum();
        let (s, co) = phase.sin_cos();
        // Re(c e^{iφ}) and its derivative along φ.
        let re = c.re * co - c.im * s;
        let im = c.re * s + c.im * co;
        v += re;
        for a in 0..dim {
            g[a] -= k[a] * im;
            for b in 0..dim {
                h[a][b] -= k[a] * k[b] * re;
            }
        }
    }
    (v, g, h)
}

/// Ascent step `−H⁻¹g` when `H` is negative definite.
fn newton_step(g: &[f64; 3], h: &Hessian, dim: usize) -> Option<[f64; 3]> {
    let mut out = [0.0; 3];
    match dim {
        2 => {
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            if !(h[0][0] < 0.0 && det > 0.0) {
                return None;
            }
            out[0] = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
            out[1] = -(-h[1][0] * g[0] + h[0][0] * g[1]) / det;
        }
        _ => {
            let m = h;
            let minor = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            if !(m[0][0] < 0.0 && minor > 0.0 && det < 0.0) {
                return None;
            }
            // Cramer's rule on H s = −g.
            for (col, o) in out.iter_mut().enumerate() {
                let mut a = *m;
                for row in 0..3 {
                    a[row][col] = -g[row];
                }
                let d = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
                *o = d / det;
            }
        }
    }
    Some(out)
}

fn pointwise_sup(components: &[Vec<f64>]) -> f64 {
    let len = components.first().map_or(0, Vec::len);
    (0..len).map(|i| components.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt()).fold(0.0, f64::max)
}

/// Grid maxima of `|∇θ|`, of the Frobenius norm of `∇u`, and of `|Λ^αθ|`.
pub(crate) fn gradient_terms(transport: &Transport, theta: &SpectralField, alpha: f64) -> Result<(f64, f64, f64)> {
    let grad: Vec<Vec<f64>> = gradient(theta)?.iter().map(|g| g.inverse().into_values()).collect();
    let mut du = Vec::new();
    for u in transport.velocity(theta) {
        for d in gradient(&u)? {
            du.push(d.inverse().into_values());
        }
    }
    let lam = if theta.zero_mode().norm() == 0.0 {
        fractional_laplacian(theta, alpha)?
    } else {
        let mut t = theta.clone();
        t.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        fractional_laplacian(&t, alpha)?
    };
    Ok((pointwise_sup(&grad), pointwise_sup(&du), lam.inverse().max_abs()))
}

/// One row of the diagnostics series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub l2: f64,
    /// Supremum of the trigonometric interpolant.
    pub linf: f64,
    pub linf_grid: f64,
    pub l3: f64,
    pub mean: f64,
    pub grad_sup: f64,
    /// `∫₀^t ‖∇θ‖_∞`, trapezoid over every step.
    pub blowup_integral: f64,
    pub grad_u_sup: f64,
    pub lambda_alpha_sup: f64,
    /// `∫₀^t (‖∇u‖_∞ + ‖Λ^αθ‖_∞)`, trapezoid over every step.
    pub v_tilde: f64,
    pub hm: f64,
    /// `t^γ ‖θ‖_{H^{m+γα}}`, one per configured `γ`.
    pub smoothing: Vec<f64>,
    /// Worst `|θ(x)−θ(y)| − ω(|x−y|)` over all grid pairs, when monitored.
    pub moc_margin: Option<f64>,
}

pub(crate) struct SampleInputs<'a> {
    pub t: f64,
    pub theta: &'a SpectralField,
    pub grad_sup: f64,
    pub grad_u_sup: f64,
    pub lambda_alpha_sup: f64,
    pub blowup_integral: f64,
    pub v_tilde: f64,
    pub m: u32,
    pub alpha: f64,
    pub gammas: &'a [f64],
    pub moc_margin: Option<f64>,
}

pub(crate) fn sample(inp: SampleInputs<'_>) -> Sample {
    let field: ScalarField = inp.theta.inverse();
    Sample {
        t: inp.t,
        l2: inp.theta.l2_norm_sq().sqrt(),
        linf: interpolant_sup(inp.theta),
        linf_grid: field.max_abs(),
        l3: field.lp_norm(3.0),
        mean: inp.theta.zero_mode().re,
        grad_sup: inp.grad_sup,
        blowup_integral: inp.blowup_integral,
        grad_u_sup: inp.grad_u_sup,
        lambda_alpha_sup: inp.lambda_alpha_sup,
        v_tilde: inp.v_tilde,
        hm: bessel_norm(inp.theta, inp.m as f64),
        smoothing: inp
            .gammas
            .iter()
            .map(|&g| inp.t.powf(g) * bessel_norm(inp.theta, inp.m as f64 + g * inp.alpha))
            .collect(),
        moc_margin: inp.moc_margin,
    }
}

/// Time series of run diagnostics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub gammas: Vec<f64>,
    pub samples: Vec<Sample>,
}

impl DiagnosticsSeries {
    /// Plot-ready CSV. Columns: `t, l2, linf, linf_grid, l3, mean, grad_sup,
    /// blowup_integral, grad_u_sup, lambda_alpha_sup, v_tilde, hm`, then one
    /// `smooth_g<γ>` column per smoothing exponent and `moc_margin` (empty
    /// when not monitored). Floats use the shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("t,l2,linf,linf_grid,l3,mean,grad_sup,blowup_integral,grad_u_sup,lambda_alpha_sup,v_tilde,hm");
        for g in &self.gammas {
            let _ = write!(out, ",smooth_g{g}");
        }
        out.push_str(",moc_margin\n");
        for s in &self.samples {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                s.t,
                s.l2,
                s.linf,
                s.linf_grid,
                s.l3,
                s.mean,
                s.grad_sup,
                s.blowup_integral,
                s.grad_u_sup,
                s.lambda_alpha_sup,
                s.v_tilde,
                s.hm
            );
            for v in &s.smoothing {
                let _ = write!(out, ",{v}");
            }
            match s.moc_margin {
                Some(m) => {
                    let _ = writeln!(out, ",{m}");
                }
                None => out.push_str(",\n"),
            }
        }
        out
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }
}
