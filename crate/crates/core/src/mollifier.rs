//! The mollified system: the smoothing operator `𝒯_ε`, the ODE it reduces
//! to, its time integration and the contraction study in `ε`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{power_symbol, Model, Transport};
use crate::error::{Error, Result};
use crate::littlewood_paley::sobolev_weights;
use crate::quadrature::{integrate, QuadOptions};
use crate::spectral::{gradient, Grid, ScalarField, SpectralField};

const QUAD: QuadOptions = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-13, max_intervals: 2000 };

/// `J₀(z)` by the trapezoid rule on `(1/π)∫_0^π cos(z sin τ) dτ`, which is
/// spectrally accurate for this periodic integrand.
pub fn bessel_j0(z: f64) -> f64 {
    let m = 32 + 2 * z.abs().ceil() as usize;
    let h = std::f64::consts::PI / m as f64;
    (0..m).map(|j| (z * (h * j as f64).sin()).cos()).sum::<f64>() / m as f64
}

fn bump(r: f64) -> f64 {
    if r < 1.0 {
        (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

fn radial_kernel(dim: usize, z: f64) -> f64 {
    match dim {
        2 => bessel_j0(z),
        _ => {
            if z.abs() < 1e-4 {
                1.0 - z * z / 6.0
            } else {
                z.sin() / z
            }
        }
    }
}

/// The radial bump `ρ(r) ∝ exp(−1/(1−r²))` on the unit ball, unit mass.
#[derive(Clone, Debug)]
pub struct Mollifier {
    dim: usize,
    eps: f64,
    mass: f64,
}

impl Mollifier {
    pub fn new(dim: usize, eps: f64) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::param(format!("mollifier needs dim 2 or 3, got {dim}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::param(format!("mollifier width must be positive, got {eps}")));
        }
        let mass = Self::moment(dim, 0.0)?;
        Ok(Self { dim, eps, mass })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `ω_d ∫_0^1 bump(r) r^{d−1} K_d(κr) dr`.
    fn moment(dim: usize, kappa: f64) -> Result<f64> {
        let area = if dim == 2 { std::f64::consts::TAU } else { 4.0 * std::f64::consts::PI };
        let f = |r: f64| bump(r) * r.powi(dim as i32 - 1) * radial_kernel(dim, kappa * r);
        Ok(area * integrate(f, 0.0, 1.0, &QUAD)?.value)
    }

    /// Unit-width profile `ρ(r)`.
    pub fn profile(&self, r: f64) -> f64 {
        bump(r) / self.mass
    }

    /// `ρ̂(κ)` of the unit-width profile.
    pub fn transform_at(&self, kappa: f64) -> Result<f64> {
        Ok(Self::moment(self.dim, kappa)? / self.mass)
    }

    /// `ρ̂(ε|k|)` on the lattice; one quadrature per distinct `|m|²`.
    pub fn symbol(&self, grid: &Grid) -> Result<Vec<f64>> {
        if grid.dim() != self.dim {
            return Err(Error::GridMismatch(format!("{}-D mollifier on a {}-D grid", self.dim, grid.dim())));
        }
        let keys: Vec<i64> = (0..grid.len()).map(|i| grid.mode(i).iter().map(|m| m * m).sum()).collect();
        let mut distinct: Vec<i64> = keys.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let values: Vec<f64> = distinct
            .par_iter()
            .map(|&k2| self.transform_at(self.eps * grid.dk() * (k2 as f64).sqrt()))
            .collect::<Result<_>>()?;
        let table: HashMap<i64, f64> = distinct.into_iter().zip(values).collect();
        Ok(keys.iter().map(|k| table[k]).collect())
    }

    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        let sym = self.symbol(f.grid())?;
        Ok(f.map_real(|i| sym[i]))
    }
}

/// `𝒯_ε f` on the grid of `f`.
pub fn mollify(f: &ScalarField, eps: f64) -> Result<ScalarField> {
    Ok(Mollifier::new(f.grid().dim(), eps)?.apply(&f.transform())?.inverse())
}

/// `sup_k |1 − ρ̂(ε|k|)| ⟨k⟩^{-1}`: the norm of `𝒯_ε − I` from `H^s` to
/// `H^{s−1}` on the lattice, for every `s`.
pub fn smoothing_defect(grid: &Grid, eps: f64) -> Result<f64> {
    let sym = Mollifier::new(grid.dim(), eps)?.symbol(grid)?;
    Ok((0..grid.len())
        .map(|i| {
            let k = grid.wavevector(i);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            (1.0 - sym[i]).abs() / (1.0 + k2).sqrt()
        })
        .fold(0.0, f64::max))
}

/// `sup_{f≠0} ‖𝒯_ε Λ^order f‖_∞ / ‖f‖_{L²}` on the lattice.
pub fn derivative_sup_ratio(grid: &Grid, eps: f64, order: f64) -> Result<f64> {
    let sym = Mollifier::new(grid.dim(), eps)?.symbol(grid)?;
    let pw = power_symbol(grid, order);
    let s: f64 = sym.iter().zip(&pw).map(|(r, p)| (r * p).powi(2)).sum();
    Ok((s / grid.volume()).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizedConfig {
    pub model: Model,
    pub alpha: f64,
    pub nu: f64,
    pub eps: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Samples are taken every `stride` steps (and at the end).
    pub stride: usize,
    /// Sobolev index of the energy diagnostics.
    pub m: u32,
}

impl RegularizedConfig {
    fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::param(format!("nu must be nonnegative, got {}", self.nu)));
        }
        if !(self.dt > 0.0 && self.t_final > 0.0) {
            return Err(Error::param(format!("need dt > 0 and T > 0, got dt={}, T={}", self.dt, self.t_final)));
        }
        if self.stride == 0 {
            return Err(Error::param("stride must be positive"));
        }
        Ok(())
    }
}

/// The right-hand side `F_ε(θ) = −ν𝒯²_ε|D|^α θ − 𝒯_ε[(𝒯_ε u)·∇(𝒯_ε θ)]`.
#[derive(Clone, Debug)]
pub struct RegularizedSystem {
    transport: Transport,
    rho: Vec<f64>,
    damping: Vec<f64>,
    half_power: Vec<f64>,
    weights: Vec<f64>,
}

impl RegularizedSystem {
    pub fn new(grid: Grid, config: RegularizedConfig) -> Result<Self> {
        config.validate()?;
        let transport = Transport::new(grid, config.model, config.alpha)?;
        let rho = Mollifier::new(grid.dim(), config.eps)?.symbol(&grid)?;
        let pw = power_symbol(&grid, config.alpha);
        let damping = rho.iter().zip(&pw).map(|(r, p)| config.nu * r * r * p).collect();
        let half_power = power_symbol(&grid, 0.5 * config.alpha);
        let weights = sobolev_weights(&grid, config.m);
        Ok(Self { transport, rho, damping, half_power, weights })
    }

    pub fn rhs(&self, theta: &SpectralField) -> SpectralField {
        let smooth = theta.map_real(|i| self.rho[i]);
        let adv = self.transport.advection(&smooth);
        let c = theta
            .coeffs()
            .iter()
            .zip(adv.coeffs())
            .enumerate()
            .map(|(i, (t, a))| a * self.rho[i] - t * self.damping[i])
            .collect();
        SpectralField::new(*theta.grid(), c).expect("finite right-hand side")
    }

    fn hm(&self, f: &SpectralField) -> f64 {
        let s: f64 = f.coeffs().iter().zip(&self.weights).map(|(c, w)| c.norm_sqr() * w).sum();
        (s * f.grid().volume()).sqrt()
    }

    fn sample(&self, t: f64, theta: &SpectralField) -> Result<RegularizedSample> {
        let field = theta.inverse();
        let smooth = theta.map_real(|i| self.rho[i]);
        let smooth_field = smooth.inverse();
        let grads: Vec<Vec<f64>> = gradient(&smooth)?.iter().map(|g| g.inverse().into_values()).collect();
        let grad_sup = (0..field.values().len())
            .map(|i| grads.iter().map(|g| g[i] * g[i]).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let diss = smooth.map_real(|i| self.half_power[i]);
        let adv = self.transport.advection(&smooth);
        let transfer: f64 = theta
            .coeffs()
            .iter()
            .zip(adv.coeffs())
            .enumerate()
            .map(|(i, (t, a))| self.weights[i] * self.rho[i] * (t.conj() * a).re)
            .sum::<f64>()
            * theta.grid().volume();
        Ok(RegularizedSample {
            t,
            l2: theta.l2_norm_sq().sqrt(),
            linf: field.max_abs(),
            hm: self.hm(theta),
            mean: theta.zero_mode().re,
            grad_sup,
            l3: smooth_field.lp_norm(3.0),
            dissipation: self.hm(&diss),
            transfer,
        })
    }

    fn rk4(&self, theta: &SpectralField, dt: f64) -> SpectralField {
        let k1 = self.rhs(theta);
        let k2 = self.rhs(&axpy(theta, 0.5 * dt, &k1));
        let k3 = self.rhs(&axpy(theta, 0.5 * dt, &k2));
        let k4 = self.rhs(&axpy(theta, dt, &k3));
        let c = theta
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, t)| {
                t + (k1.coeffs()[i] + 2.0 * k2.coeffs()[i] + 2.0 * k3.coeffs()[i] + k4.coeffs()[i]) * (dt / 6.0)
            })
            .collect();
        SpectralField::from_raw(*theta.grid(), c)
    }
}

fn axpy(x: &SpectralField, a: f64, y: &SpectralField) -> SpectralField {
    let c = x.coeffs().iter().zip(y.coeffs()).map(|(x, y)| x + y * a).collect();
    SpectralField::from_raw(*x.grid(), c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizedSample {
    pub t: f64,
    pub l2: f64,
    pub linf: f64,
    pub hm: f64,
    pub mean: f64,
    /// `‖∇𝒯_ε θ‖_∞`.
    pub grad_sup: f64,
    /// `‖𝒯_ε θ‖_{L³}`.
    pub l3: f64,
    /// `‖𝒯_ε |D|^{α/2} θ‖_{H^m}`.
    pub dissipation: f64,
    /// `½ d/dt‖θ‖²_{H^m} + ν‖𝒯_ε|D|^{α/2}θ‖²_{H^m}`, evaluated exactly from the
    /// right-hand side: only the transport term survives.
    pub transfer: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: RegularizedConfig,
    pub dim: usize,
    /// Step actually used: `T` divided into equal steps no longer than `dt`.
    pub dt: f64,
    pub samples: Vec<RegularizedSample>,
    /// State at every sample time.
    pub states: Vec<SpectralField>,
    /// Time at which the state stopped being finite, if it did.
    pub aborted_at: Option<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &SpectralField {
        self.states.last().expect("trajectory has the initial state")
    }
}

/// Integrates `dθ/dt = F_ε(θ)` with the classical fourth-order Runge–Kutta
/// method.
pub fn picard_solve(theta0: &ScalarField, config: &RegularizedConfig) -> Result<Trajectory> {
    let grid = *theta0.grid();
    let system = RegularizedSystem::new(grid, *config)?;
    let steps = (config.t_final / config.dt - 1e-9).ceil().max(1.0) as usize;
    let dt = config.t_final / steps as f64;
    let mut theta = theta0.transform();
    let mut traj = Trajectory {
        config: *config,
        dim: grid.dim(),
        dt,
        samples: vec![system.sample(0.0, &theta)?],
        states: vec![theta.clone()],
        aborted_at: None,
    };
    for step in 1..=steps {
        let next = system.rk4(&theta, dt);
        let t = step as f64 * dt;
        if next.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            traj.aborted_at = Some(t);
            return Ok(traj);
        }
        theta = next;
        if step % config.stride == 0 || step == steps {
            traj.samples.push(system.sample(t, &theta)?);
            traj.states.push(theta.clone());
        }
    }
    Ok(traj)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyCheck {
    /// `Ĉ`, the largest ratio seen over the calibration window.
    pub constant: f64,
    pub calibration_samples: usize,
    /// Largest ratio over the whole trajectory: the smallest constant for
    /// which the inequality holds on every interval.
    pub global_constant: f64,
    /// `(t, LHS − Ĉ·RHS)` after calibration.
    pub residuals: Vec<(f64, f64)>,
    pub worst: f64,
    pub pass: bool,
    /// The `L³` term is only stated for the 3-D system; in 2-D the check is
    /// by analogy.
    pub analogy: bool,
}

/// Checks `½ d/dt‖θ‖²_{H^m} + ν‖𝒯|D|^{α/2}θ‖²_{H^m} ≤ Ĉ(‖∇𝒯θ‖_∞ + ‖𝒯θ‖_{L³})‖θ‖²_{H^m}`
/// at every sample. The left side is the exact transfer term rather than a
/// finite difference. `Ĉ` is calibrated on the first quarter of the samples
/// and then frozen.
pub fn energy_inequality_check(traj: &Trajectory) -> EnergyCheck {
    let terms: Vec<(f64, f64, f64)> =
        traj.samples.iter().map(|s| (s.t, s.transfer, (s.grad_sup + s.l3) * s.hm * s.hm)).collect();
    let ratio = |&(_, l, r): &(f64, f64, f64)| if r > 0.0 { l / r } else { 0.0 };
    let calibration = (terms.len() / 4).max(1).min(terms.len());
    let constant = terms[..calibration].iter().map(ratio).fold(0.0, f64::max);
    let global_constant = terms.iter().map(ratio).fold(0.0, f64::max);
    let residuals: Vec<(f64, f64)> = terms[calibration..].iter().map(|&(t, l, r)| (t, l - constant * r)).collect();
    let worst = residuals.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    EnergyCheck {
        constant,
        calibration_samples: calibration,
        global_constant,
        pass: residuals.iter().all(|r| r.1 <= 0.0),
        worst: if residuals.is_empty() { 0.0 } else { worst },
        residuals,
        analogy: traj.dim == 2,
    }
}

/// `sup_t ‖θ^a(t) − θ^b(t)‖_{L²}` over common sample times.
pub fn trajectory_distance(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.states.len() != b.states.len() {
        return Err(Error::param("trajectories have different sample counts"));
    }
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| Ok(x.sub(y)?.l2_norm_sq().sqrt()))
        .try_fold(0.0f64, |m, d: Result<f64>| Ok(m.max(d?)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionPair {
    pub eps_hi: f64,
    pub eps_lo: f64,
    pub sup_diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub pairs: Vec<ContractionPair>,
    /// Least-squares slope of `ln sup_diff` against `ln eps_hi`; absent when
    /// fewer than two differences are positive.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

/// Least-squares line through `(x, y)`; `None` for fewer than two distinct `x`.
pub fn fit_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Runs the regularized system for every `ε` and fits the decay of
/// consecutive trajectory differences against `max(ε, ε̃)`.
pub fn contraction_study(
    theta0: &ScalarField,
    eps_list: &[f64],
    base: &RegularizedConfig,
) -> Result<ContractionReport> {
    contraction_runs(theta0, eps_list, base).map(|r| r.0)
}

/// As [`contraction_study`], also returning the trajectories, widest `ε`
/// first.
pub fn contraction_runs(
    theta0: &ScalarField,
    eps_list: &[f64],
    base: &RegularizedConfig,
) -> Result<(ContractionReport, Vec<Trajectory>)> {
    if eps_list.len() < 4 {
        return Err(Error::param(format!("contraction study needs at least 4 widths, got {}", eps_list.len())));
    }
    let mut eps = eps_list.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    if eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::param("mollifier widths must be positive"));
    }
    let ratio = eps[1] / eps[0];
    if eps.windows(2).any(|w| ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-9) || ratio >= 1.0 {
        return Err(Error::param("mollifier widths must form a decreasing geometric sequence"));
    }
    let runs: Vec<Trajectory> =
        eps.par_iter().map(|&e| picard_solve(theta0, &RegularizedConfig { eps: e, ..*base })).collect::<Result<_>>()?;
    if let Some(r) = runs.iter().find(|r| r.aborted_at.is_some()) {
        return Err(Error::Diverged { time: r.aborted_at.unwrap_or(0.0) });
    }
    let pairs: Vec<ContractionPair> = runs
        .windows(2)
        .map(|w| {
            Ok(ContractionPair {
                eps_hi: w[0].config.eps,
                eps_lo: w[1].config.eps,
                sup_diff: trajectory_distance(&w[0], &w[1])?,
            })
        })
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> =
        pairs.iter().filter(|p| p.sup_diff > 0.0).map(|p| (p.eps_hi.ln(), p.sup_diff.ln())).collect();
    let fit = fit_line(&pts);
    Ok((ContractionReport { pairs, slope: fit.map(|f| f.0), intercept: fit.map(|f| f.1) }, runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{fractional_laplacian, random_field};
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn j0_reference_values() {
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j0(2.404_825_557_695_773)).abs() < 1e-14);
        assert!((bessel_j0(50.0) - 0.055_812_327_669_251_86).abs() < 1e-13);
    }

    #[test]
    fn unit_mass_and_bounded_symbol() {
        for dim in [2, 3] {
            let m = Mollifier::new(dim, 0.3).unwrap();
            assert!((m.transform_at(0.0).unwrap() - 1.0).abs() < 1e-14);
            for kappa in [0.5, 3.0, 17.0, 80.0] {
                assert!(m.transform_at(kappa).unwrap().abs() <= 1.0);
            }
            let g = Grid::periodic(dim, 8).unwrap();
            let c = ScalarField::from_fn(g, |_| 1.0).unwrap();
            let out = mollify(&c, 0.3).unwrap();
            assert!(out.sub(&c).unwrap().max_abs() < 1e-14);
        }
        assert!(Mollifier::new(2, 0.0).is_err());
        // Profile integrates to one.
        let m = Mollifier::new(3, 1.0).unwrap();
        let mass = integrate(|r| 4.0 * std::f64::consts::PI * r * r * m.profile(r), 0.0, 1.0, &QUAD).unwrap();
        assert!((mass.value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn commutes_with_derivatives() {
        let g = Grid::periodic(3, 8).unwrap();
        let f = random_field(g, 2, |k| (-k).exp());
        let m = Mollifier::new(3, 0.4).unwrap();
        let a = fractional_laplacian(&m.apply(&f).unwrap(), 0.7).unwrap();
        let b = m.apply(&fractional_laplacian(&f, 0.7).unwrap()).unwrap();
        assert!(a.max_diff(&b) < 1e-15);
        let ga = gradient(&m.apply(&f).unwrap()).unwrap();
        let gb: Vec<SpectralField> = gradient(&f).unwrap().iter().map(|d| m.apply(d).unwrap()).collect();
        for (x, y) in ga.iter().zip(&gb) {
            assert!(x.max_diff(y) < 1e-12);
        }
    }

    #[test]
    fn defect_is_first_order_and_derivative_ratio_grows() {
        let g = Grid::periodic(2, 256).unwrap();
        let eps: [f64; 4] = [0.4, 0.2, 0.1, 0.05];
        let pts: Vec<(f64, f64)> = eps.iter().map(|&e| (e.ln(), smoothing_defect(&g, e).unwrap().ln())).collect();
        let (slope, _) = fit_line(&pts).unwrap();
        assert!((slope - 1.0).abs() < 0.1, "{slope}");
        let g = Grid::periodic(2, 128).unwrap();
        let pts: Vec<(f64, f64)> =
            eps.iter().map(|&e| (e.ln(), derivative_sup_ratio(&g, e, 1.0).unwrap().ln())).collect();
        let (slope, _) = fit_line(&pts).unwrap();
        assert!((-2.2..0.0).contains(&slope), "{slope}");
    }

    fn qg_config(eps: f64) -> RegularizedConfig {
        RegularizedConfig { model: Model::Qg2d, alpha: 0.5, nu: 0.1, eps, dt: 0.01, t_final: 0.2, stride: 2, m: 2 }
    }

    #[test]
    fn rhs_basics() {
        let g = Grid::periodic(2, 16).unwrap();
        let sys = RegularizedSystem::new(g, qg_config(0.2)).unwrap();
        assert_eq!(sys.rhs(&SpectralField::zeros(g)).max_diff(&SpectralField::zeros(g)), 0.0);
        let f = random_field(g, 5, |k| (1.0 + k * k).recip());
        assert!(sys.rhs(&f).zero_mode().norm() < 1e-15);
        let g3 = Grid::periodic(3, 8).unwrap();
        let cfg = RegularizedConfig { model: Model::Mpm3d, nu: 0.0, ..qg_config(0.2) };
        let sys = RegularizedSystem::new(g3, cfg).unwrap();
        let vertical = SpectralField::single_mode(g3, &[0, 0, 1], Complex64::new(0.5, 0.0)).unwrap();
        assert!(sys.rhs(&vertical).max_diff(&SpectralField::zeros(g3)) < 1e-16);
    }

    #[test]
    fn linear_regime_matches_exact_decay() {
        let g = Grid::periodic(2, 16).unwrap();
        let a = 1e-8;
        let th = ScalarField::from_fn(g, |x| a * x[0].cos()).unwrap();
        let cfg = RegularizedConfig { nu: 1.0, t_final: 0.5, dt: 0.01, ..qg_config(0.3) };
        let traj = picard_solve(&th, &cfg).unwrap();
        let rho = Mollifier::new(2, 0.3).unwrap().transform_at(0.3).unwrap();
        let last = traj.samples.last().unwrap();
        let exact = a * a * (-2.0 * rho * rho * last.t).exp() * 2.0 * std::f64::consts::PI.powi(2);
        assert!((last.l2 * last.l2 / exact - 1.0).abs() < 1e-6);
        for w in traj.samples.windows(2) {
            assert!(w[1].l2 <= w[0].l2);
        }
    }

    #[test]
    fn fourth_order_in_dt() {
        let g = Grid::periodic(2, 16).unwrap();
        let th = random_field(g, 8, |k| if k < 4.0 { 0.5 } else { 0.0 }).inverse();
        let run = |dt: f64| {
            let cfg = RegularizedConfig { dt, t_final: 0.4, stride: 1000, ..qg_config(0.2) };
            picard_solve(&th, &cfg).unwrap().final_state().clone()
        };
        let reference = run(0.1 / 8.0);
        let e1 = run(0.1).sub(&reference).unwrap().l2_norm_sq().sqrt();
        let e2 = run(0.05).sub(&reference).unwrap().l2_norm_sq().sqrt();
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "{ratio}");
    }

    #[test]
    fn mean_and_l2_along_a_run() {
        let g = Grid::periodic(2, 32).unwrap();
        let mut th = random_field(g, 4, |k| if k < 6.0 { (1.0 + k * k).recip() } else { 0.0 });
        th.coeffs_mut()[0] = Complex64::new(0.3, 0.0);
        let cfg = RegularizedConfig { t_final: 1.0, dt: 0.01, stride: 5, ..qg_config(0.1) };
        let traj = picard_solve(&th.inverse(), &cfg).unwrap();
        for s in &traj.samples {
            assert!((s.mean - 0.3).abs() < 1e-12);
            assert!(s.l2 <= traj.samples[0].l2 * (1.0 + 1e-12));
        }
        let zero = picard_solve(&ScalarField::zeros(g), &cfg).unwrap();
        let check = energy_inequality_check(&zero);
        assert!(check.pass && check.analogy && check.worst == 0.0);
    }

    #[test]
    fn transfer_matches_the_energy_balance() {
        let g = Grid::periodic(2, 32).unwrap();
        let th = random_field(g, 6, |k| if k < 5.0 { (1.0 + k * k).recip() } else { 0.0 }).inverse();
        let cfg = RegularizedConfig { t_final: 0.02, dt: 0.001, stride: 10, m: 2, ..qg_config(0.1) };
        let traj = picard_solve(&th, &cfg).unwrap();
        let (a, b) = (&traj.samples[1], &traj.samples[2]);
        let (ha, hb) = (a.hm * a.hm, b.hm * b.hm);
        let fd = (hb - ha) / (2.0 * (b.t - a.t)) + 0.05 * (a.dissipation.powi(2) + b.dissipation.powi(2));
        let mid = 0.5 * (a.transfer + b.transfer);
        let scale = 0.1 * a.dissipation.powi(2);
        assert!((fd - mid).abs() < 1e-4 * scale, "{fd} {mid} {scale}");
    }

    #[test]
    fn linear_regime_has_no_transfer() {
        let g = Grid::periodic(2, 16).unwrap();
        let th = ScalarField::from_fn(g, |x| 1e-8 * x[0].cos()).unwrap();
        let cfg = RegularizedConfig { nu: 1.0, t_final: 0.5, dt: 0.01, stride: 2, ..qg_config(0.2) };
        let check = energy_inequality_check(&picard_solve(&th, &cfg).unwrap());
        assert!(check.pass && check.worst <= 0.0, "{check:?}");
        let th = ScalarField::from_fn(g, |x| 1e-8 * (x[0].cos() + (2.0 * x[1]).sin())).unwrap();
        let traj = picard_solve(&th, &cfg).unwrap();
        for s in &traj.samples {
            assert!(s.transfer.abs() <= 1e-6 * cfg.nu * s.dissipation.powi(2));
        }
    }

    #[test]
    fn energy_constant_is_uniform_in_eps() {
        let g = Grid::periodic(3, 16).unwrap();
        let th = random_field(g, 4, |k| if k < 5.0 { (1.0 + k * k).powi(-2) } else { 0.0 }).inverse();
        let consts: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&eps| {
                let cfg =
                    RegularizedConfig { model: Model::Mpm3d, m: 3, nu: 0.3, t_final: 0.5, stride: 5, ..qg_config(eps) };
                let check = energy_inequality_check(&picard_solve(&th, &cfg).unwrap());
                assert!(!check.analogy);
                check.global_constant
            })
            .collect();
        let (lo, hi) = consts.iter().fold((f64::MAX, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        assert!(hi > 0.0 && hi < 1.0 && hi / lo < 2.0, "{consts:?}");
    }

    #[test]
    fn contraction_edges() {
        let g = Grid::periodic(2, 16).unwrap();
        let cfg = RegularizedConfig { t_final: 0.1, ..qg_config(0.2) };
        let z = ScalarField::zeros(g);
        let rep = contraction_study(&z, &[0.2, 0.1, 0.05, 0.025], &cfg).unwrap();
        assert!(rep.pairs.iter().all(|p| p.sup_diff == 0.0));
        assert!(rep.slope.is_none());
        assert!(contraction_study(&z, &[0.2, 0.1, 0.05], &cfg).is_err());
        assert!(contraction_study(&z, &[0.2, 0.1, 0.05, 0.01], &cfg).is_err());
        let th = random_field(g, 1, |k| if k < 3.0 { 1.0 } else { 0.0 }).inverse();
        let a = picard_solve(&th, &cfg).unwrap();
        assert_eq!(trajectory_distance(&a, &a).unwrap(), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn contracts_lp_norms(seed in 0u64..100_000, eps in 0.05f64..0.5) {
            let g = Grid::periodic(2, 32).unwrap();
            let f = random_field(g, seed, |k| (1.0 + k).recip()).inverse();
            let out = mollify(&f, eps).unwrap();
            for p in [1.0, 2.0, f64::INFINITY] {
                prop_assert!(out.lp_norm(p) <= f.lp_norm(p), "p = {}", p);
            }
        }
    }
}
