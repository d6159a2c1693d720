//! The operator moduli `Ω₁`, `Ω₂` and `Ω` built from a modulus `ω`.

use super::modulus::ModulusOfContinuity;
use super::params::EstimateConstants;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_breaks, integrate_power_tail, Integral, QuadOptions};

/// Tolerances for the operator moduli: relative accuracy so that values
/// near `ξ = 0` keep their sign information, and an absolute floor far
/// below the `1e-9` reporting threshold.
pub(crate) const OPTS: QuadOptions = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-11, max_intervals: 4000 };

/// Breakpoints for `[0, xi]`: kinks of `ω` plus decades above the first
/// positive kink so that `1/η` weights are resolved cheaply.
fn head_points(w: &ModulusOfContinuity, xi: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut kinks: Vec<f64> = w.kinks().into_iter().filter(|&k| k > 0.0 && k < xi).collect();
    kinks.sort_by(f64::total_cmp);
    let lo = kinks.first().copied().unwrap_or(xi);
    let mut decade = xi / 10.0;
    let mut decades = Vec::new();
    while decade > lo {
        decades.push(decade);
        decade /= 10.0;
    }
    pts.extend(kinks);
    pts.extend(decades);
    pts.push(xi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `∫_0^ξ ω(η) η^{-q} dη`, `q ≤ 1`.
pub(crate) fn head(w: &ModulusOfContinuity, xi: f64, q: f64) -> Result<Integral> {
    integrate_breaks(|eta| w.eval(eta) * eta.powf(-q), &head_points(w, xi), &OPTS)
}

/// `∫_ξ^∞ ω(η) η^{-1-p} dη`, `p > 0`.
pub(crate) fn tail(w: &ModulusOfContinuity, xi: f64, p: f64) -> Result<Integral> {
    if w.growth_exponent() >= p {
        return Err(Error::DivergentTail(format!(
            "modulus grows like η^{} but the weight only decays like η^-{}",
            w.growth_exponent(),
            1.0 + p
        )));
    }
    integrate_power_tail(|eta| w.eval(eta), xi, p, &w.kinks(), &OPTS)
}

fn check(xi: f64, alpha: Option<f64>) -> Result<()> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::param(format!("operator modulus needs xi > 0, got {xi}")));
    }
    if let Some(a) = alpha {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1), got {a}")));
        }
    }
    Ok(())
}

/// `Ω₁(ξ) = A(∫_0^ξ ω/η + ξ ∫_ξ^∞ ω/η²)`, the modulus of a Riesz transform.
pub fn omega1(xi: f64, w: &ModulusOfContinuity, consts: &EstimateConstants) -> Result<Integral> {
    check(xi, None)?;
    Ok((head(w, xi, 1.0)? + tail(w, xi, 1.0)? * xi) * consts.a)
}

/// `Ω₂(ξ) = A_α(∫_0^ξ ω/η^α + ξ ∫_ξ^∞ ω/η^{1+α})`, the modulus of a modified
/// Riesz transform `Λ^{α-1} R_j`.
pub fn omega2(xi: f64, w: &ModulusOfContinuity, alpha: f64, consts: &EstimateConstants) -> Result<Integral> {
    check(xi, Some(alpha))?;
    Ok((head(w, xi, alpha)? + tail(w, xi, alpha)? * xi) * consts.a_alpha)
}

/// `Ω(ξ) = C_α(ξ^{1-α} ∫_0^ξ ω/η + ξ ∫_ξ^∞ ω/η^{1+α})`, the modulus of the
/// porous-media velocity law.
pub fn omega_big(xi: f64, w: &ModulusOfContinuity, alpha: f64, consts: &EstimateConstants) -> Result<Integral> {
    check(xi, Some(alpha))?;
    Ok((head(w, xi, 1.0)? * xi.powf(1.0 - alpha) + tail(w, xi, alpha)? * xi) * consts.c_alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moc::{log_grid, MocParameters};
    use crate::quadrature::integrate;

    fn clip() -> ModulusOfContinuity {
        ModulusOfContinuity::clipped_identity()
    }

    // Closed forms for ω = min(η, 1).
    fn omega1_clip(x: f64) -> f64 {
        if x <= 1.0 {
            2.0 * x - x * x.ln()
        } else {
            1.0 + x.ln() + 1.0
        }
    }

    fn omega2_clip(x: f64, a: f64) -> f64 {
        if x <= 1.0 {
            x.powf(2.0 - a) / (2.0 - a) + x * ((1.0 - x.powf(1.0 - a)) / (1.0 - a) + 1.0 / a)
        } else {
            1.0 / (2.0 - a) + (x.powf(1.0 - a) - 1.0) / (1.0 - a) + x * x.powf(-a) / a
        }
    }

    fn omega_big_clip(x: f64, a: f64) -> f64 {
        let head = if x <= 1.0 { x } else { 1.0 + x.ln() };
        let tail = if x <= 1.0 { (1.0 - x.powf(1.0 - a)) / (1.0 - a) + 1.0 / a } else { x.powf(-a) / a };
        x.powf(1.0 - a) * head + x * tail
    }

    #[test]
    fn closed_form_examples() {
        let c = EstimateConstants::default();
        let v = omega1(0.5, &clip(), &c).unwrap();
        assert!((v.value - 1.346_573_590_279_972_7).abs() < 1e-10, "{v:?}");
        assert!(v.error < 1e-9);
        let v = omega2(0.25, &clip(), 0.5, &c).unwrap();
        assert!((v.value - 0.833_333_333_333_333_3).abs() < 1e-10);
        let v = omega_big(0.25, &clip(), 0.5, &c).unwrap();
        assert!((v.value - 0.875).abs() < 1e-10);
    }

    #[test]
    fn matches_closed_forms_on_dyadic_grid() {
        let c = EstimateConstants::default();
        for j in -10..=4 {
            let x = 2f64.powi(j);
            for a in [0.1, 0.5, 0.9] {
                let o1 = omega1(x, &clip(), &c).unwrap().value;
                let o2 = omega2(x, &clip(), a, &c).unwrap().value;
                let ob = omega_big(x, &clip(), a, &c).unwrap().value;
                assert!((o1 - omega1_clip(x)).abs() < 1e-8, "Ω₁({x})");
                assert!((o2 - omega2_clip(x, a)).abs() < 1e-8, "Ω₂({x}, {a}): {o2} vs {}", omega2_clip(x, a));
                assert!((ob - omega_big_clip(x, a)).abs() < 1e-8, "Ω({x}, {a})");
            }
        }
    }

    #[test]
    fn small_argument_limits_and_monotonicity() {
        let c = EstimateConstants::default();
        let w = clip();
        assert!(omega1(1e-12, &w, &c).unwrap().value < 1e-10);
        assert!(omega2(1e-12, &w, 0.5, &c).unwrap().value < 1e-5);
        assert!(omega_big(1e-12, &w, 0.5, &c).unwrap().value < 1e-5);
        let mut prev = 0.0;
        for x in log_grid(1e-4, 1e2, 20) {
            let v = omega1(x, &w, &c).unwrap().value;
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn alpha_to_one_limit() {
        let c = EstimateConstants::default();
        for x in [0.1, 0.5, 2.0] {
            let a = omega2(x, &clip(), 1.0 - 1e-6, &c).unwrap().value;
            let b = omega1(x, &clip(), &c).unwrap().value;
            assert!((a - b).abs() < 1e-4, "{x}: {a} vs {b}");
        }
    }

    #[test]
    fn divergent_tails_and_bad_arguments() {
        let c = EstimateConstants::default();
        let lin = ModulusOfContinuity::linear(1.0).unwrap();
        assert!(matches!(omega1(0.5, &lin, &c), Err(Error::DivergentTail(_))));
        let root = ModulusOfContinuity::power(1.0, 0.6).unwrap();
        assert!(matches!(omega2(0.5, &root, 0.5, &c), Err(Error::DivergentTail(_))));
        assert!(omega2(0.5, &root, 0.7, &c).is_ok());
        assert!(omega1(0.0, &clip(), &c).is_err());
        assert!(omega2(0.5, &clip(), 1.0, &c).is_err());
    }

    #[test]
    fn scaling_identity() {
        // Ω[ω_λ](ξ) = λ^{α-1} Ω[ω](λξ)
        let c = EstimateConstants::default();
        let w = ModulusOfContinuity::explicit(MocParameters::new(0.5, 1.25, 1e-4, 1e-2).unwrap());
        for lambda in [0.25, 3.0, 40.0] {
            let wl = w.scaled(lambda).unwrap();
            for x in [1e-4, 0.03, 2.0] {
                let lhs = omega_big(x, &wl, 0.5, &c).unwrap().value;
                let rhs = lambda.powf(-0.5) * omega_big(lambda * x, &w, 0.5, &c).unwrap().value;
                assert!((lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0), "{lambda} {x}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn composition_chain() {
        // Ω₂ with Ω₁ substituted for ω is dominated by K·T with
        // K = 1/α + 1/(1-α) + 1/(2-α) and T the four-term expansion, and
        // T ≤ 2Ω.
        let c = EstimateConstants::default();
        let w = ModulusOfContinuity::explicit(MocParameters::new(0.5, 1.25, 1e-3, 2f64.powi(-8)).unwrap());
        let a = 0.5;
        let k = 1.0 / a + 1.0 / (1.0 - a) + 1.0 / (2.0 - a);
        let o1 = |eta: f64| omega1(eta, &w, &c).unwrap().value;
        let loose = QuadOptions { abs_tol: 1e-9, rel_tol: 1e-7, max_intervals: 400 };
        for x in [1e-3, 0.02, 0.5, 5.0] {
            let head_s = integrate(|e| o1(e) * e.powf(-a), 0.0, x, &loose).unwrap().value;
            let tail_s = integrate_power_tail(o1, x, a, &[], &loose).unwrap().value;
            let s = head_s + x * tail_s;
            let t = x.powf(1.0 - a) * head(&w, x, 1.0).unwrap().value
                + head(&w, x, a).unwrap().value
                + x.powf(2.0 - a) * tail(&w, x, 1.0).unwrap().value
                + x * tail(&w, x, a).unwrap().value;
            let big = omega_big(x, &w, a, &c).unwrap().value;
            assert!(s <= k * t * (1.0 + 1e-6), "{x}: S={s} K·T={}", k * t);
            assert!(t <= 2.0 * big * (1.0 + 1e-12), "{x}");
        }
    }
}
