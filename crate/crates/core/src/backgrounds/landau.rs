//! Uniform magnetic field: equidistant level ladder `(l + 1/2) omega_c` with
//! infinitely degenerate levels and true gaps in between.
//!
//! The Green function between the levels factorizes into a gauge phase and a
//! rotation-invariant radial profile,
//! `G(r, s; E) = (1/2 pi) e^{-i pi xi0 (r ^ s)} e^{-u} F(a, 2u)` with
//! `a = 1/2 - E/omega_c`, `u = omega_c |r - s|^2 / 4`, and
//! `F(a, x) = Gamma(a) U(a, 1, x)` the scaled confluent function of the
//! second kind. Its regularized diagonal is
//! `Q(E) = -(1/2 pi) [psi(a) + 2 gamma - ln 2 + ln omega_c]`,
//! site-independent by translation covariance.

use super::{require_distinct, Background};
use crate::error::{Error, Result};
use crate::model::{xi0_of, ChargeSign, Gap, Point};
use crate::numerics::gamma::{digamma, trigamma_any, EULER_GAMMA};
use crate::numerics::tricomi::{gamma_u, gamma_u_da};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Uniform-field background.
#[derive(Debug, Clone)]
pub struct Landau {
    charge_sign: ChargeSign,
    b0: f64,
}

impl Landau {
    /// Construct for a nonzero uniform field `b0`.
    pub fn new(charge_sign: ChargeSign, b0: f64) -> Result<Self> {
        if !b0.is_finite() || b0 == 0.0 {
            return Err(Error::domain(
                "landau",
                format!("requires a finite nonzero field, got b0 = {b0}"),
            ));
        }
        Ok(Landau { charge_sign, b0 })
    }

    /// Cyclotron frequency `|b0|`.
    pub fn omega_c(&self) -> f64 {
        self.b0.abs()
    }

    /// The `l`-th level, `(l + 1/2) omega_c`.
    pub fn level(&self, l: usize) -> f64 {
        (l as f64 + 0.5) * self.omega_c()
    }

    /// Confluent parameter `a = 1/2 - E/omega_c`.
    fn a_of(&self, e: f64) -> f64 {
        0.5 - e / self.omega_c()
    }

    /// Rotation-invariant radial profile `(1/2 pi) e^{-u} F(a, 2u)` of the
    /// Green function at source distance `d`.
    fn radial_profile(&self, d: f64, e: f64) -> Result<f64> {
        let a = self.a_of(e);
        let u = self.omega_c() * d * d / 4.0;
        let f = gamma_u(a, 2.0 * u)?;
        Ok((-u).exp() * f / (2.0 * PI))
    }

    /// Energy derivative of the radial profile (at fixed `d`), used by the
    /// composite background whose spectral function differentiates `G`.
    pub fn green_energy_derivative(&self, r: Point, s: Point, e: f64) -> Result<Complex64> {
        let d = require_distinct(r, s)?;
        let a = self.a_of(e);
        let u = self.omega_c() * d * d / 4.0;
        let dfda = gamma_u_da(a, 2.0 * u)?;
        let scalar = -(-u).exp() * dfda / (2.0 * PI * self.omega_c());
        Ok(Complex64::from_polar(1.0, -PI * self.xi0() * r.wedge(s)) * scalar)
    }
}

impl Background for Landau {
    fn name(&self) -> &'static str {
        "landau"
    }

    fn charge_sign(&self) -> ChargeSign {
        self.charge_sign
    }

    fn xi0(&self) -> f64 {
        xi0_of(self.charge_sign, self.b0)
    }

    fn gap(&self, k: usize) -> Result<Gap> {
        let wc = self.omega_c();
        if k == 0 {
            Gap::new(f64::NEG_INFINITY, 0.5 * wc)
        } else {
            Gap::new((k as f64 - 0.5) * wc, (k as f64 + 0.5) * wc)
        }
    }

    fn q_function(&self, e: f64, _site: Point) -> Result<f64> {
        let wc = self.omega_c();
        let psi = digamma(self.a_of(e))?;
        Ok(-(psi + 2.0 * EULER_GAMMA - (2.0_f64).ln() + wc.ln()) / (2.0 * PI))
    }

    fn q_derivative(&self, e: f64, _site: Point) -> Result<f64> {
        let wc = self.omega_c();
        Ok(trigamma_any(self.a_of(e))? / (2.0 * PI * wc))
    }

    fn green(&self, r: Point, site: Point, e: f64) -> Result<Complex64> {
        let d = require_distinct(r, site)?;
        let scalar = self.radial_profile(d, e)?;
        Ok(Complex64::from_polar(1.0, -PI * self.xi0() * r.wedge(site)) * scalar)
    }

    fn decay_radius(&self, e: f64) -> f64 {
        // |G| ~ e^{-u} (2u)^{|a|}; solve u - |a| ln(2u) = 45 by one
        // fixed-point sweep, then convert u back to a distance.
        let a = self.a_of(e).abs();
        let mut u = 45.0 + a * 90.0_f64.ln();
        u = 45.0 + a * (2.0 * u).ln().max(1.0);
        2.0 * (u / self.omega_c()).sqrt()
    }

    fn angular_momentum(&self, _e0: f64, site: Point) -> Result<f64> {
        let rho = site.norm();
        Ok(PI * self.xi0() * rho * rho)
    }

    fn rebuilt_at_xi0(&self, xi0: f64) -> Result<Box<dyn Background>> {
        let b0 = 2.0 * PI * self.charge_sign.sign() * xi0;
        Ok(Box::new(Landau::new(self.charge_sign, b0)?))
    }
}
