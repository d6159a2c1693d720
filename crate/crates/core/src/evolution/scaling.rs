use serde::{Deserialize, Serialize};

use super::solver::Simulation;
use crate::dynamics::Model;
use crate::error::{Error, Result};
use crate::spectral::ScalarField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub lambda: usize,
    pub n: usize,
    pub steps: usize,
    pub dt: f64,
    /// `sup_{x, steps} |θ_λ(x, t) − θ(λx, λ^α t)|` on the grid.
    pub discrepancy: f64,
}

/// Compares a run from `θ₀(λx)` with step `dt` against a run from `θ₀` with
/// step `λ^α dt`, sampled at `λx`. The points `λx_j` are grid points, so
/// the comparison needs no interpolation; only the dealiasing cutoff, which
/// acts on the rescaled run at a relatively coarser scale, breaks the
/// symmetry.
pub fn scaling_invariance_check(
    model: Model,
    alpha: f64,
    nu: f64,
    theta0: &ScalarField,
    lambda: usize,
    dt: f64,
    steps: usize,
) -> Result<ScalingReport> {
    let grid = *theta0.grid();
    let n = grid.n();
    if lambda == 0 {
        return Err(Error::param("scale factor must be a positive integer"));
    }
    let spec = theta0.transform();
    let peak = spec.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let aliased = spec.coeffs().iter().enumerate().any(|(i, c)| {
        c.norm() > 1e-13 * peak && grid.mode(i).iter().any(|m| (m.unsigned_abs() as usize) * lambda * 2 >= n)
    });
    if aliased {
        return Err(Error::GridMismatch(format!(
            "initial field has modes beyond n/(2λ) = {}; the rescaled field is not resolved",
            n as f64 / (2.0 * lambda as f64)
        )));
    }
    let dim = grid.dim();
    let stretched_index = |j: usize| -> usize {
        let idx = grid.unflatten(j);
        let mut out = [0usize; 3];
        for d in 0..dim {
            out[d] = (idx[d] * lambda) % n;
        }
        grid.flatten(&out[..dim])
    };
    let v0 = theta0.values();
    let rescaled = ScalarField::new(grid, (0..grid.len()).map(|j| v0[stretched_index(j)]).collect())?;

    let mut a = Simulation::new(model, alpha, nu, theta0)?;
    let mut b = Simulation::new(model, alpha, nu, &rescaled)?;
    let dt_a = (lambda as f64).powf(alpha) * dt;
    let mut discrepancy = 0.0f64;
    for _ in 0..steps {
        a.step(dt_a)?;
        b.step(dt)?;
        let va = a.state().inverse().into_values();
        let vb = b.state().inverse().into_values();
        for (j, x) in vb.iter().enumerate() {
            discrepancy = discrepancy.max((x - va[stretched_index(j)]).abs());
        }
    }
    Ok(ScalingReport { lambda, n, steps, dt, discrepancy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_field, Grid};

    #[test]
    fn identity_scale_is_exact_and_aliasing_rejected() {
        let g = Grid::periodic(2, 32).unwrap();
        let th = random_field(g, 3, |k| if k < 5.0 { 0.5 } else { 0.0 }).inverse();
        let rep = scaling_invariance_check(Model::Qg2d, 0.5, 0.1, &th, 1, 0.05, 3).unwrap();
        assert_eq!(rep.discrepancy, 0.0);
        let rough = random_field(g, 3, |k| if k < 12.0 { 0.5 } else { 0.0 }).inverse();
        assert!(scaling_invariance_check(Model::Qg2d, 0.5, 0.1, &rough, 2, 0.05, 1).is_err());
        assert!(scaling_invariance_check(Model::Qg2d, 0.5, 0.1, &th, 0, 0.05, 1).is_err());
    }

    #[test]
    fn dyadic_rescale_shrinks_with_resolution() {
        let mut last = f64::INFINITY;
        for n in [32, 64] {
            let g = Grid::periodic(2, n).unwrap();
            let th = random_field(g, 5, |k| if k < 4.0 { 0.5 } else { 0.0 }).inverse();
            let rep = scaling_invariance_check(Model::Qg2d, 0.5, 0.0, &th, 2, 0.01, 1).unwrap();
            assert!(rep.discrepancy < last, "{n}: {}", rep.discrepancy);
            last = rep.discrepancy;
        }
        assert!(last < 1e-8, "{last}");
    }
}
