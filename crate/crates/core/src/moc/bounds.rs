//! Convection and dissipation bounds of the breach scenario, and the
//! negativity certificate built from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::modulus::{log_grid, ModulusOfContinuity};
use super::operators::{omega_big, OPTS};
use super::params::{EstimateConstants, MocParameters};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_breaks, integrate_power_tail, Integral};

/// `C₁ Ω(ξ) ω'(ξ)` for a general modulus.
pub fn convection_bound_for(
    xi: f64,
    w: &ModulusOfContinuity,
    alpha: f64,
    consts: &EstimateConstants,
) -> Result<Integral> {
    if consts.c1 == 0.0 {
        return Ok(Integral::default());
    }
    let big = omega_big(xi, w, alpha, consts)?;
    let slope = match w {
        ModulusOfContinuity::Explicit(p) if consts.conservative_slope && xi <= p.delta() => w.slope_at_zero(),
        _ => w.slope(xi),
    };
    Ok(big * (consts.c1 * slope))
}

/// `C₁ Ω(ξ) ω'(ξ)` for the explicit modulus.
pub fn convection_bound(xi: f64, params: &MocParameters, consts: &EstimateConstants) -> Result<Integral> {
    convection_bound_for(xi, &ModulusOfContinuity::explicit(*params), params.alpha(), consts)
}

/// The two dissipation integrals, without their constants:
/// `∫_0^{ξ/2} (ω(ξ+2η) + ω(ξ−2η) − 2ω(ξ)) η^{-1-α}` and
/// `∫_{ξ/2}^∞ (ω(2η+ξ) − ω(2η−ξ) − 2ω(ξ)) η^{-1-α}`.
pub fn dissipation_parts(xi: f64, w: &ModulusOfContinuity, alpha: f64) -> Result<(Integral, Integral)> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::param(format!("dissipation bound needs xi > 0, got {xi}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let half = 0.5 * xi;
    let kinks = w.kinks();

    let mut near_pts = vec![0.0, half];
    for &k in &kinks {
        for eta in [0.5 * (k - xi), 0.5 * (xi - k)] {
            if eta > 0.0 && eta < half {
                near_pts.push(eta);
            }
        }
    }
    near_pts.sort_by(f64::total_cmp);
    let near = integrate_breaks(|eta| w.second_difference(xi, 2.0 * eta) * eta.powf(-1.0 - alpha), &near_pts, &OPTS)?;

    // The constant −2ω(ξ) integrates in closed form; the remaining
    // increment decays like ω'(2η).
    let w_xi = w.eval(xi);
    let constant = -2.0 * w_xi * half.powf(-alpha) / alpha;
    let far_kinks: Vec<f64> = kinks.iter().flat_map(|&k| [0.5 * (k - xi), 0.5 * (k + xi)]).collect();
    let spread =
        integrate_power_tail(|eta| w.increment((2.0 * eta - xi).max(0.0), 2.0 * xi), half, alpha, &far_kinks, &OPTS)?;
    let far = Integral {
        value: constant + spread.value,
        error: spread.error + 4.0 * f64::EPSILON * constant.abs(),
        evaluations: spread.evaluations,
    };
    Ok((near, far))
}

/// `C₂ᵃ·near + C₂ᵇ·far`; nonpositive for every concave modulus.
pub fn dissipation_bound_for(
    xi: f64,
    w: &ModulusOfContinuity,
    alpha: f64,
    consts: &EstimateConstants,
) -> Result<Integral> {
    let (near, far) = dissipation_parts(xi, w, alpha)?;
    Ok(near * consts.c2_near + far * consts.c2_far)
}

pub fn dissipation_bound(xi: f64, params: &MocParameters, consts: &EstimateConstants) -> Result<Integral> {
    dissipation_bound_for(xi, &ModulusOfContinuity::explicit(*params), params.alpha(), consts)
}

/// The canonical certification grid: 160 log-spaced points on
/// `[1e-8, 1e3]` plus `δ/2, δ, 2δ`, sorted.
pub fn canonical_grid(delta: f64) -> Vec<f64> {
    let mut g = log_grid(1e-8, 1e3, 160);
    g.extend([0.5 * delta, delta, 2.0 * delta]);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginRecord {
    pub xi: f64,
    pub conv: f64,
    pub diss: f64,
    pub margin: f64,
    /// Summed quadrature error estimate of `conv` and `diss`.
    pub error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstMargin {
    pub xi: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativityReport {
    pub params: MocParameters,
    pub constants: EstimateConstants,
    pub grid: Vec<MarginRecord>,
    pub worst: WorstMargin,
    pub pass: bool,
}

impl NegativityReport {
    /// One row per `ξ`, with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi,conv,diss,margin,error\n");
        for r in &self.grid {
            out.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", r.xi, r.conv, r.diss, r.margin, r.error));
        }
        out
    }

    /// Largest quadrature error estimate over the grid.
    pub fn max_error(&self) -> f64 {
        self.grid.iter().map(|r| r.error).fold(0.0, f64::max)
    }
}

/// Evaluates `margin(ξ) = convection + dissipation` on `grid` and passes iff
/// every margin is strictly negative.
pub fn verify_negativity(params: &MocParameters, consts: &EstimateConstants, grid: &[f64]) -> Result<NegativityReport> {
    consts.validate()?;
    if grid.is_empty() {
        return Err(Error::param("empty xi grid"));
    }
    let w = ModulusOfContinuity::explicit(*params);
    let alpha = params.alpha();
    let records: Vec<MarginRecord> = grid
        .par_iter()
        .map(|&xi| {
            let conv = convection_bound_for(xi, &w, alpha, consts)?;
            let diss = dissipation_bound_for(xi, &w, alpha, consts)?;
            Ok(MarginRecord {
                xi,
                conv: conv.value,
                diss: diss.value,
                margin: conv.value + diss.value,
                error: conv.error + diss.error,
            })
        })
        .collect::<Result<_>>()?;
    let worst = records
        .iter()
        .map(|r| WorstMargin { xi: r.xi, margin: r.margin })
        .max_by(|a, b| a.margin.total_cmp(&b.margin))
        .expect("non-empty grid");
    Ok(NegativityReport { params: *params, constants: *consts, grid: records, pass: worst.margin < 0.0, worst })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Maximum number of candidates evaluated.
    pub max_candidates: usize,
    /// Deepest crossover tried is `2^-max_log2_delta`.
    pub max_log2_delta: u32,
    /// `γ` runs over `δ/4, δ/16, …` for this many steps.
    pub gamma_steps: u32,
    /// `r = 1 + r_fraction·α`.
    pub r_fraction: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { max_candidates: 64, max_log2_delta: 30, gamma_steps: 8, r_fraction: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub r: f64,
    pub gamma: f64,
    pub delta: f64,
    pub worst_margin: f64,
    /// Best worst-margin seen so far, nonincreasing along the trail.
    pub best_so_far: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub alpha: f64,
    pub constants: EstimateConstants,
    pub budget: SearchBudget,
    pub found: Option<MocParameters>,
    /// Report of the accepted tuple, or of the best candidate on failure.
    pub best: Option<NegativityReport>,
    pub trail: Vec<CandidateRecord>,
    /// Crossovers skipped because `1 − rδ^{r−1} ≤ 1/2`.
    pub skipped: usize,
}

/// Sweeps `δ = 2^-3, 2^-4, …` and, for each, `γ = δ/4, δ/16, …`, and returns
/// the first tuple certified on the canonical grid.
pub fn search_parameters(alpha: f64, consts: &EstimateConstants, budget: &SearchBudget) -> Result<SearchReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(budget.r_fraction > 0.0 && budget.r_fraction < 1.0) {
        return Err(Error::param(format!("r_fraction must lie in (0, 1), got {}", budget.r_fraction)));
    }
    consts.validate()?;
    let r = 1.0 + budget.r_fraction * alpha;
    let mut report = SearchReport {
        alpha,
        constants: *consts,
        budget: *budget,
        found: None,
        best: None,
        trail: Vec::new(),
        skipped: 0,
    };
    let mut best = f64::INFINITY;
    for j in 3..=budget.max_log2_delta.max(3) {
        let delta = 2f64.powi(-(j as i32));
        if 1.0 - r * delta.powf(r - 1.0) <= 0.5 {
            report.skipped += 1;
            continue;
        }
        for k in 1..=budget.gamma_steps {
            if report.trail.len() >= budget.max_candidates {
                return Ok(report);
            }
            let gamma = delta * 4f64.powi(-(k as i32));
            let params = MocParameters::new(alpha, r, gamma, delta)?;
            let verdict = verify_negativity(&params, consts, &canonical_grid(delta))?;
            let worst = verdict.worst.margin;
            let improved = worst < best;
            best = best.min(worst);
            report.trail.push(CandidateRecord { r, gamma, delta, worst_margin: worst, best_so_far: best });
            if verdict.pass {
                report.found = Some(params);
                report.best = Some(verdict);
                return Ok(report);
            }
            if improved {
                report.best = Some(verdict);
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub params: MocParameters,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Shape conditions on the explicit modulus that the certificate relies on.
pub fn validate_moc(params: &MocParameters) -> ValidationReport {
    let w = ModulusOfContinuity::explicit(*params);
    let (d, g) = (params.delta(), params.gamma());
    let mut checks = Vec::new();
    let mut push = |name: &str, pass: bool, detail: String| {
        checks.push(Check { name: name.to_string(), pass, detail });
    };

    let grid = log_grid(1e-8, 1e4, 200);
    let defect = w.shape_defect(&grid);
    push(
        "monotone_concave",
        defect.is_none(),
        match defect {
            Some(x) => format!("shape fails near xi = {x:e}"),
            None => "nondecreasing and midpoint-concave on 200 log-spaced points".into(),
        },
    );

    let left = params.left_slope_at_delta();
    let right = w.slope(d * (1.0 + 1e-12));
    push(
        "slope_ordering",
        left > 0.5 && right < 0.5 && left > right,
        format!("w'(delta-) = {left:.6}, w'(delta+) = {right:.3e}"),
    );

    let wd = w.eval(d);
    push("crossover_height", wd >= 0.5 * d, format!("w(delta) = {wd:.6e}, delta/2 = {:.6e}", 0.5 * d));

    let lhs = 2.0 * std::f64::consts::LN_2 * g;
    push("gamma_small", lhs < 0.5 * d, format!("2 ln2 gamma = {lhs:.6e}, delta/2 = {:.6e}", 0.5 * d));

    let curv = w.curvature(1e-12);
    push("curvature_blowup", curv < -1e6, format!("w''(1e-12) = {curv:.3e}"));

    let pass = checks.iter().all(|c| c.pass);
    ValidationReport { params: *params, checks, pass }
}
