use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The tuple `(α, r, γ, δ)` of the explicit modulus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MocParameters {
    alpha: f64,
    r: f64,
    gamma: f64,
    delta: f64,
}

impl MocParameters {
    /// Checks the structural ranges `α ∈ (0,1)`, `r ∈ (1, 1+α)` and
    /// `0 < γ < δ < 1`. The smallness requirement on `δ` is a property of
    /// the tuple that [`crate::moc::validate_moc`] reports on; it is not
    /// enforced here so that bad tuples can still be inspected.
    pub fn new(alpha: f64, r: f64, gamma: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(r > 1.0 && r < 1.0 + alpha) {
            return Err(Error::param(format!("r must lie in (1, 1 + alpha) = (1, {}), got {r}", 1.0 + alpha)));
        }
        if !(gamma > 0.0 && gamma < delta && delta < 1.0) {
            return Err(Error::param(format!("need 0 < gamma < delta < 1, got gamma={gamma}, delta={delta}")));
        }
        Ok(Self { alpha, r, gamma, delta })
    }

    /// Uses the midpoint exponent `r = 1 + α/2`.
    pub fn with_midpoint_r(alpha: f64, gamma: f64, delta: f64) -> Result<Self> {
        Self::new(alpha, 1.0 + 0.5 * alpha, gamma, delta)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `B = (2α² + α + 1)/α²`, the shift inside the logarithm.
    pub fn b(&self) -> f64 {
        let a = self.alpha;
        (2.0 * a * a + a + 1.0) / (a * a)
    }

    /// `ω'(δ⁻) = 1 − r δ^{r−1}`.
    pub fn left_slope_at_delta(&self) -> f64 {
        1.0 - self.r * self.delta.powf(self.r - 1.0)
    }

    /// Whether `δ` is small enough that `ω'(δ⁻) > 1/2`.
    pub fn delta_is_small(&self) -> bool {
        self.left_slope_at_delta() > 0.5
    }
}

/// Prefactors of the operator moduli and of the breach-scenario bounds.
///
/// None of these are pinned by the analysis; every one defaults to 1. The
/// dissipation constant is carried separately for the two integrals of the
/// dissipation term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateConstants {
    pub c1: f64,
    pub c2_near: f64,
    pub c2_far: f64,
    /// Prefactor of `Ω₁`.
    pub a: f64,
    /// Prefactor of `Ω₂`.
    pub a_alpha: f64,
    /// Prefactor of `Ω`.
    pub c_alpha: f64,
    /// Bound `ω'(ξ)` by `ω'(0) = 1` on `ξ ≤ δ` in the convection term instead
    /// of using the exact slope.
    pub conservative_slope: bool,
}

impl Default for EstimateConstants {
    fn default() -> Self {
        Self { c1: 1.0, c2_near: 1.0, c2_far: 1.0, a: 1.0, a_alpha: 1.0, c_alpha: 1.0, conservative_slope: false }
    }
}

impl EstimateConstants {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        let c = Self { c1, c2_near: c2, c2_far: c2, ..Self::default() };
        c.validate()?;
        Ok(c)
    }

    /// `C₁` and `C₂` may be zero (switching a term off); the operator
    /// prefactors must be strictly positive.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c1", self.c1), ("c2_near", self.c2_near), ("c2_far", self.c2_far)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        for (name, v) in [("a", self.a), ("a_alpha", self.a_alpha), ("c_alpha", self.c_alpha)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be finite and positive, got {v}")));
            }
        }
        Ok(())
    }
}
