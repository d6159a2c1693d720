use num_complex::Complex64;

use crate::dynamics::{power_symbol, Model, Transport};
use crate::error::{Error, Result};
use crate::spectral::{Grid, ScalarField, SpectralField};

/// State of a direct simulation of `∂θ/∂t + u·∇θ + νΛ^αθ = 0`.
#[derive(Clone, Debug)]
pub struct Simulation {
    transport: Transport,
    alpha: f64,
    nu: f64,
    power: Vec<f64>,
    theta: SpectralField,
    time: f64,
    /// `e^{−ν|k|^α dt/2}` for the last step size used.
    half: Option<(f64, Vec<f64>)>,
}

impl Simulation {
    pub fn new(model: Model, alpha: f64, nu: f64, theta0: &ScalarField) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::param(format!("nu must be nonnegative, got {nu}")));
        }
        let grid = *theta0.grid();
        let transport = Transport::new(grid, model, alpha)?;
        Ok(Self {
            transport,
            alpha,
            nu,
            power: power_symbol(&grid, alpha),
            theta: theta0.transform(),
            time: 0.0,
            half: None,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.transport.grid()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn state(&self) -> &SpectralField {
        &self.theta
    }

    pub fn transport(&self) -> &Transport {
        &self.transport
    }

    /// Test hook: transport by `u ≡ 0`, leaving pure dissipation.
    pub fn freeze_velocity(&mut self) {
        self.transport.freeze_velocity();
    }

    fn half_factor(&mut self, dt: f64) -> Vec<f64> {
        match &self.half {
            Some((h, e)) if *h == dt => e.clone(),
            _ => {
                let e: Vec<f64> = self.power.iter().map(|p| (-0.5 * self.nu * p * dt).exp()).collect();
                self.half = Some((dt, e.clone()));
                e
            }
        }
    }

    /// One integrating-factor RK4 step. On a non-finite result the state is
    /// left untouched and `Diverged` is returned.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param(format!("dt must be positive, got {dt}")));
        }
        let e = self.half_factor(dt);
        let n = |s: &SpectralField| self.transport.advection(s);
        let th = self.theta.coeffs();
        let grid = *self.grid();
        let combine = |f: &dyn Fn(usize) -> Complex64| -> SpectralField {
            SpectralField::from_raw(grid, (0..th.len()).map(f).collect())
        };

        let k1 = n(&self.theta);
        let a = combine(&|i| e[i] * (th[i] + k1.coeffs()[i] * (0.5 * dt)));
        let k2 = n(&a);
        let b = combine(&|i| e[i] * th[i] + k2.coeffs()[i] * (0.5 * dt));
        let k3 = n(&b);
        let c = combine(&|i| e[i] * e[i] * th[i] + k3.coeffs()[i] * (e[i] * dt));
        let k4 = n(&c);
        let next = combine(&|i| {
            let e2 = e[i] * e[i];
            e2 * th[i]
                + (k1.coeffs()[i] * e2 + (k2.coeffs()[i] + k3.coeffs()[i]) * (2.0 * e[i]) + k4.coeffs()[i]) * (dt / 6.0)
        });
        let t = self.time + dt;
        if next.coeffs().iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Diverged { time: t });
        }
        self.theta = next;
        self.time = t;
        Ok(())
    }
}
