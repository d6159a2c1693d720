use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moc::{displacement_increments, moc_margin, ModulusOfContinuity};
use crate::spectral::ScalarField;

/// How the scale `λ` of the monitored modulus `ω(λ·)` is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaChoice {
    Fixed {
        lambda: f64,
    },
    /// `safety` times the smallest `λ` for which `ω(λ·)` dominates every
    /// grid increment of the initial field.
    Auto {
        safety: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSpec {
    pub omega: ModulusOfContinuity,
    pub lambda: LambdaChoice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub lambda: f64,
    /// `ω_λ'(0)`, the gradient bound the modulus implies.
    pub slope_at_zero: f64,
    pub margins: Vec<(f64, f64)>,
    /// Sample times bracketing the first positive margin, if any. A breach at
    /// the first sample is reported as `(0, 0)`.
    pub first_crossing: Option<(f64, f64)>,
    /// Whether `‖∇θ‖_∞ ≤ ω_λ'(0)·(1 + 1e-3)` at every sample.
    pub gradient_bound_holds: bool,
    pub worst_gradient_ratio: f64,
}

/// Smallest `λ` (to relative accuracy 1e-6) with `ω(λ·)` above every grid
/// increment of `theta`, found by bisection in `ln λ` on `[1e-8, 1e8]`.
pub fn choose_lambda(theta: &ScalarField, omega: &ModulusOfContinuity) -> Result<f64> {
    let inc = displacement_increments(theta);
    let dominated = |lambda: f64| -> Result<bool> { Ok(moc_margin(&inc, &omega.scaled(lambda)?).0 < 0.0) };
    let (mut lo, mut hi) = (1e-8f64, 1e8f64);
    if dominated(lo)? {
        return Ok(lo);
    }
    if !dominated(hi)? {
        let v = theta.values();
        let osc = v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - v.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let reach = omega.scaled(hi)?.value(theta.grid().length() * (theta.grid().dim() as f64).sqrt() / 2.0)?;
        return Err(Error::param(format!(
            "no scale of the modulus dominates the initial field: oscillation {osc:e} exceeds {reach:e}, \
             the modulus at lambda = {hi:e} across the box; shrink the data or fix lambda"
        )));
    }
    while hi / lo > 1.0 + 1e-6 {
        let mid = (lo * hi).sqrt();
        if dominated(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub(crate) fn resolve(spec: &MonitorSpec, theta0: &ScalarField) -> Result<ModulusOfContinuity> {
    let lambda = match spec.lambda {
        LambdaChoice::Fixed { lambda } => lambda,
        LambdaChoice::Auto { safety } => {
            if !(safety >= 1.0) {
                return Err(Error::param(format!("monitor safety factor must be >= 1, got {safety}")));
            }
            safety * choose_lambda(theta0, &spec.omega)?
        }
    };
    spec.omega.scaled(lambda)
}

/// Worst margin of `theta` against `omega` over all grid pairs.
pub fn field_margin(theta: &ScalarField, omega: &ModulusOfContinuity) -> f64 {
    moc_margin(&displacement_increments(theta), omega).0
}

pub(crate) fn report(omega: &ModulusOfContinuity, margins: Vec<(f64, f64)>, grads: &[f64]) -> MonitorReport {
    let lambda = match omega {
        ModulusOfContinuity::Scaled { lambda, .. } => *lambda,
        _ => 1.0,
    };
    let slope = omega.slope_at_zero();
    let first_crossing =
        margins.iter().position(|m| m.1 > 0.0).map(
            |i| {
                if i == 0 {
                    (0.0, 0.0)
                } else {
                    (margins[i - 1].0, margins[i].0)
                }
            },
        );
    let worst_gradient_ratio = grads.iter().map(|g| g / slope).fold(0.0, f64::max);
    MonitorReport {
        lambda,
        slope_at_zero: slope,
        margins,
        first_crossing,
        gradient_bound_holds: worst_gradient_ratio <= 1.0 + 1e-3,
        worst_gradient_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moc::MocParameters;
    use crate::spectral::Grid;

    fn paper_omega() -> ModulusOfContinuity {
        ModulusOfContinuity::explicit(MocParameters::with_midpoint_r(0.5, 2f64.powi(-8), 2f64.powi(-6)).unwrap())
    }

    #[test]
    fn lambda_bisection_is_tight() {
        let g = Grid::periodic(2, 32).unwrap();
        let f = ScalarField::from_fn(g, |x| 1e-3 * x[0].sin()).unwrap();
        let w = paper_omega();
        let lambda = choose_lambda(&f, &w).unwrap();
        assert!(field_margin(&f, &w.scaled(lambda).unwrap()) < 0.0);
        assert!(field_margin(&f, &w.scaled(lambda * 0.999).unwrap()) > 0.0);
        // A Lipschitz-1e-3 field needs roughly slope 1e-3 at the origin.
        assert!(lambda > 0.9e-3 && lambda < 1.2e-3, "{lambda}");
        let big = ScalarField::from_fn(g, |x| x[0].sin()).unwrap();
        assert!(choose_lambda(&big, &w).is_err());
    }

    #[test]
    fn zero_field_and_immediate_breach() {
        let g = Grid::periodic(2, 16).unwrap();
        let w = paper_omega().scaled(2.0).unwrap();
        let z = ScalarField::zeros(g);
        let m = field_margin(&z, &w);
        assert!((m + w.eval(g.spacing())).abs() < 1e-15);
        let f = ScalarField::from_fn(g, |x| 1e-2 * x[0].sin()).unwrap();
        let tiny = paper_omega().scaled(1e-4).unwrap();
        let rep = report(&tiny, vec![(0.0, field_margin(&f, &tiny)), (0.1, 1.0)], &[0.01]);
        assert_eq!(rep.first_crossing, Some((0.0, 0.0)));
        let rep = report(&w, vec![(0.0, -1.0), (0.1, -0.5), (0.2, 0.1)], &[1.0, 2.0, 2.001]);
        assert_eq!(rep.first_crossing, Some((0.1, 0.2)));
        assert!(rep.gradient_bound_holds);
    }
}
