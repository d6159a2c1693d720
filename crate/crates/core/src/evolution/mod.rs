//! Direct pseudo-spectral integration of the active scalar equations with
//! fractional dissipation, and the trajectory diagnostics built on it.

mod diagnostics;
mod monitor;
mod scaling;
mod solver;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use diagnostics::{interpolant_sup, DiagnosticsSeries, Sample};
pub use monitor::{choose_lambda, field_margin, LambdaChoice, MonitorReport, MonitorSpec};
pub use scaling::{scaling_invariance_check, ScalingReport};
pub use solver::Simulation;

use crate::dynamics::{Model, Transport};
use crate::error::{Error, Result};
use crate::littlewood_paley::bessel_norm;
use crate::mollifier::fit_line;
use crate::spectral::snapshot::read_snapshot;
use crate::spectral::{random_field, Grid, ScalarField};
use diagnostics::{gradient_terms, sample, SampleInputs};

/// Relative slack of the maximum-principle check.
pub const MAX_PRINCIPLE_SLACK: f64 = 1e-6;
/// Relative per-sample tolerance for `‖θ‖_{L²}` to be called nonincreasing.
pub const L2_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeStep {
    Fixed {
        dt: f64,
    },
    /// `dt = cfl·Δx / max(‖u(θ₀)‖_∞, 1e-8)`, capped at `T/10`.
    Cfl {
        cfl: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Normalization {
    /// Scale to this `H^m` norm.
    Hm { value: f64 },
    /// Scale to this supremum.
    Linf { value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// Seeded Gaussian coefficients on `k_min ≤ |k| ≤ k_max` with amplitude
    /// `|k|^{-(m+1)}`, then normalized.
    Random {
        seed: u64,
        k_min: f64,
        k_max: f64,
        normalization: Normalization,
    },
    File {
        path: PathBuf,
    },
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: Model,
    pub alpha: f64,
    pub nu: f64,
    pub n: usize,
    pub length: f64,
    pub time_step: TimeStep,
    pub t_final: f64,
    pub initial: InitialData,
    /// Diagnostics every `stride` steps, plus the final time.
    pub stride: usize,
    /// Snapshot every `snapshot_stride` samples; 0 keeps the first and last.
    pub snapshot_stride: usize,
    pub monitor: Option<MonitorSpec>,
    pub gammas: Vec<f64>,
    pub m: u32,
}

impl SimConfig {
    /// Desk-scale defaults: n = 32 in 3-D, 128 in 2-D; `m` the smallest
    /// integer above `dim/2 + 1`.
    pub fn new(model: Model, alpha: f64, nu: f64) -> Self {
        let (n, m) = match model {
            Model::Mpm3d => (32, 3),
            Model::Qg2d => (128, 3),
        };
        Self {
            model,
            alpha,
            nu,
            n,
            length: std::f64::consts::TAU,
            time_step: TimeStep::Cfl { cfl: 0.25 },
            t_final: 1.0,
            initial: InitialData::Random {
                seed: 0,
                k_min: 1.0,
                k_max: 8.0,
                normalization: Normalization::Hm { value: 1.0 },
            },
            stride: 10,
            snapshot_stride: 0,
            monitor: None,
            gammas: vec![1.0, 2.0],
            m,
        }
    }

    /// Hard errors for invalid values, warnings for advisory ones.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::param(format!("nu must be nonnegative, got {}", self.nu)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::param(format!("T must be positive, got {}", self.t_final)));
        }
        if self.stride == 0 {
            return Err(Error::param("stride must be positive"));
        }
        match self.time_step {
            TimeStep::Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => {
                return Err(Error::param(format!("dt must be positive, got {dt}")));
            }
            TimeStep::Cfl { cfl } if !(cfl > 0.0 && cfl.is_finite()) => {
                return Err(Error::param(format!("cfl must be positive, got {cfl}")));
            }
            _ => {}
        }
        if let InitialData::Random { k_min, k_max, normalization, .. } = &self.initial {
            if !(*k_min >= 0.0 && k_max >= k_min) {
                return Err(Error::param(format!("need 0 <= k_min <= k_max, got {k_min}, {k_max}")));
            }
            let target = match normalization {
                Normalization::Hm { value } | Normalization::Linf { value } => *value,
            };
            if !(target >= 0.0 && target.is_finite()) {
                return Err(Error::param(format!("normalization target must be nonnegative, got {target}")));
            }
        }
        if self.gammas.iter().any(|g| !(*g >= 0.0)) {
            return Err(Error::param("smoothing exponents must be nonnegative"));
        }
        let mut warnings = Vec::new();
        let dim = self.model.dim() as f64;
        if (self.m as f64) <= dim / 2.0 + 1.0 {
            warnings.push(format!("m = {} is not above dim/2 + 1 = {}", self.m, dim / 2.0 + 1.0));
        }
        Ok(warnings)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.model.dim(), self.n, self.length)
    }
}

/// Builds the initial field described by `config`.
pub fn initial_field(config: &SimConfig) -> Result<ScalarField> {
    let grid = config.grid()?;
    match &config.initial {
        InitialData::Zero => Ok(ScalarField::zeros(grid)),
        InitialData::File { path } => {
            let f = read_snapshot(path)?;
            if *f.grid() != grid {
                return Err(Error::GridMismatch(format!(
                    "{} holds a {}-D n={} field, the run expects {}-D n={}",
                    path.display(),
                    f.grid().dim(),
                    f.grid().n(),
                    grid.dim(),
                    grid.n()
                )));
            }
            Ok(f)
        }
        InitialData::Random { seed, k_min, k_max, normalization } => {
            let p = config.m as f64 + 1.0;
            let f = random_field(grid, *seed, |k| if k >= *k_min && k <= *k_max { k.powf(-p) } else { 0.0 });
            let (current, target) = match normalization {
                Normalization::Hm { value } => (bessel_norm(&f, config.m as f64), *value),
                Normalization::Linf { value } => (interpolant_sup(&f), *value),
            };
            if current == 0.0 {
                return Ok(ScalarField::zeros(grid));
            }
            Ok(f.scale(target / current).inverse())
        }
    }
}

/// `cfl·Δx / max(‖u(θ₀)‖_∞, 1e-8)`, capped at `T/10`.
pub fn choose_dt(config: &SimConfig, theta0: &ScalarField) -> Result<f64> {
    let cfl = match config.time_step {
        TimeStep::Fixed { dt } => return Ok(dt.min(config.t_final)),
        TimeStep::Cfl { cfl } => cfl,
    };
    let transport = Transport::new(*theta0.grid(), config.model, config.alpha)?;
    let u = transport.velocity_sup(&theta0.transform()).max(1e-8);
    Ok((cfl * theta0.grid().spacing() / u).min(config.t_final / 10.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub complete: bool,
    pub aborted_at: Option<f64>,
    pub abort_reason: Option<String>,
    pub steps_taken: usize,
    pub dt: f64,
    /// `‖θ(t)‖_∞ ≤ ‖θ₀‖_∞·(1 + 1e-6)` at every sample.
    pub max_principle: bool,
    pub worst_linf_ratio: f64,
    /// `‖θ‖_{L²}` nonincreasing between samples up to a relative 1e-10.
    pub l2_nonincreasing: bool,
    pub mean_drift: f64,
    /// `∫₀^T ‖∇θ‖_∞`; finite whenever the run completes.
    pub blowup_integral: f64,
    pub v_finite: bool,
    /// Least-squares slope of each smoothing tracker over the second half.
    pub smoothing_slopes: Vec<Option<f64>>,
    pub monitor: Option<MonitorReport>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub series: DiagnosticsSeries,
    pub snapshots: Vec<(f64, ScalarField)>,
    pub report: RunReport,
}

/// Trend of `values` against `times` over the second half of the run.
pub fn second_half_slope(times: &[f64], values: &[f64]) -> Option<f64> {
    let t_end = *times.last()?;
    let pts: Vec<(f64, f64)> =
        times.iter().zip(values).filter(|(t, _)| **t >= 0.5 * t_end).map(|(t, v)| (*t, *v)).collect();
    fit_line(&pts).map(|f| f.0)
}

/// Integrates the configured run, sampling diagnostics every `stride` steps.
pub fn run(config: &SimConfig) -> Result<RunOutput> {
    let warnings = config.validate()?;
    let theta0 = initial_field(config)?;
    run_from(config, &theta0, warnings)
}

/// As [`run`], from a given initial field.
pub fn run_from(config: &SimConfig, theta0: &ScalarField, mut warnings: Vec<String>) -> Result<RunOutput> {
    warnings.extend(config.validate()?);
    warnings.dedup();
    let mut sim = Simulation::new(config.model, config.alpha, config.nu, theta0)?;
    let dt_max = choose_dt(config, theta0)?;
    let steps = (config.t_final / dt_max - 1e-9).ceil().max(1.0) as usize;
    let dt = config.t_final / steps as f64;
    let omega = config.monitor.as_ref().map(|m| monitor::resolve(m, theta0)).transpose()?;

    let mut series = DiagnosticsSeries { gammas: config.gammas.clone(), samples: Vec::new() };
    let mut snapshots = vec![(0.0, theta0.clone())];
    let (mut blowup, mut v_tilde) = (0.0, 0.0);
    let mut terms = gradient_terms(sim.transport(), sim.state(), config.alpha)?;
    let take = |sim: &Simulation, terms: (f64, f64, f64), blowup: f64, v_tilde: f64| {
        let margin = omega.as_ref().map(|w| field_margin(&sim.state().inverse(), w));
        sample(SampleInputs {
            t: sim.time(),
            theta: sim.state(),
            grad_sup: terms.0,
            grad_u_sup: terms.1,
            lambda_alpha_sup: terms.2,
            blowup_integral: blowup,
            v_tilde,
            m: config.m,
            alpha: config.alpha,
            gammas: &config.gammas,
            moc_margin: margin,
        })
    };
    series.samples.push(take(&sim, terms, blowup, v_tilde));

    let mut abort: Option<(f64, String)> = None;
    let mut taken = 0;
    for step in 1..=steps {
        if let Err(e) = sim.step(dt) {
            abort = Some((sim.time() + dt, e.to_string()));
            break;
        }
        taken = step;
        let next = gradient_terms(sim.transport(), sim.state(), config.alpha)?;
        blowup += 0.5 * dt * (terms.0 + next.0);
        v_tilde += 0.5 * dt * (terms.1 + terms.2 + next.1 + next.2);
        terms = next;
        if step % config.stride == 0 || step == steps {
            series.samples.push(take(&sim, terms, blowup, v_tilde));
            let count = series.samples.len() - 1;
            if step == steps || (config.snapshot_stride > 0 && count.is_multiple_of(config.snapshot_stride)) {
                snapshots.push((sim.time(), sim.state().inverse()));
            }
        }
    }
    if abort.is_some() {
        // Partial series: keep the last good state as the final snapshot.
        if series.samples.last().map(|s| s.t) != Some(sim.time()) {
            series.samples.push(take(&sim, terms, blowup, v_tilde));
        }
        snapshots.push((sim.time(), sim.state().inverse()));
    }

    let s = &series.samples;
    let linf0 = s[0].linf;
    let worst_linf_ratio = if linf0 > 0.0 { s.iter().map(|x| x.linf / linf0).fold(0.0, f64::max) } else { 0.0 };
    let max_principle = s.iter().all(|x| x.linf <= linf0 * (1.0 + MAX_PRINCIPLE_SLACK));
    let l2_nonincreasing = s.windows(2).all(|w| w[1].l2 <= w[0].l2 * (1.0 + L2_SLACK) + f64::MIN_POSITIVE);
    let mean_drift = s.iter().map(|x| (x.mean - s[0].mean).abs()).fold(0.0, f64::max);
    let times = series.times();
    let smoothing_slopes = (0..config.gammas.len())
        .map(|g| {
            let v: Vec<f64> = s.iter().map(|x| x.smoothing[g]).collect();
            second_half_slope(&times, &v)
        })
        .collect();
    let monitor = omega.as_ref().map(|w| {
        let margins = s.iter().map(|x| (x.t, x.moc_margin.unwrap_or(f64::NAN))).collect();
        let grads: Vec<f64> = s.iter().map(|x| x.grad_sup).collect();
        monitor::report(w, margins, &grads)
    });
    let report = RunReport {
        complete: abort.is_none(),
        aborted_at: abort.as_ref().map(|a| a.0),
        abort_reason: abort.map(|a| a.1),
        steps_taken: taken,
        dt,
        max_principle,
        worst_linf_ratio,
        l2_nonincreasing,
        mean_drift,
        blowup_integral: blowup,
        v_finite: blowup.is_finite(),
        smoothing_slopes,
        monitor,
        warnings,
    };
    Ok(RunOutput { series, snapshots, report })
}
