//! Uniform magnetic field with a fixed zero-range trap at the origin.
//!
//! The trap is itself a point interaction, of strength `alpha0`, attached to
//! the uniform-field background. Its resolvent is an explicit rank-one
//! update of the field kernel `G0`, so the composite background stays in
//! closed form:
//!
//! * kernel: `G(r, s) = G0(r, s) - G0(r, 0) G0(0, s) / D(E)`,
//!   `D(E) = Q0(E) + alpha0`;
//! * regularized diagonal at a movable site `s`:
//!   `Q(E; s) = Q0(E) - g(s)^2 / D(E)` with `g(s) = G0(s, 0; E)` (real: the
//!   gauge phase vanishes against the origin);
//! * spectrum: the field ladder `eps_j = (j + 1/2) omega_c` plus one trap
//!   level `E_dj` inside each ladder gap (the root of `D` there), so the
//!   composite gaps interleave as
//!   `(-inf, E_d0), (E_d0, eps_0), (eps_0, E_d1), (E_d1, eps_1), ...`.
//!
//! `Q` diverges to `-inf`/`+inf` at the two edges of every composite gap,
//! so a movable point level exists in each of them for every coupling.

use super::{Background, Landau};
use crate::error::{Error, Result};
use crate::krein::find_root_in_gap;
use crate::model::{ChargeSign, Gap, Point};
use crate::numerics::Tolerance;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Below this margin on `|Q0 + alpha0|` the rank-one update has lost all
/// significance: the requested energy sits on the trap level itself.
const INNER_POLE_GUARD: f64 = 1e-12;

/// Uniform field plus a zero-range trap at the origin.
#[derive(Debug, Clone)]
pub struct ZeroRangeDot {
    inner: Landau,
    alpha0: f64,
}

impl ZeroRangeDot {
    /// Construct for flux density `b0` and trap strength `alpha0`.
    pub fn new(charge_sign: ChargeSign, b0: f64, alpha0: f64) -> Result<Self> {
        if !alpha0.is_finite() {
            return Err(Error::domain(
                "zero-range dot",
                format!("trap strength must be finite, got {alpha0}"),
            ));
        }
        Ok(ZeroRangeDot {
            inner: Landau::new(charge_sign, b0)?,
            alpha0,
        })
    }

    /// The unperturbed uniform-field background.
    pub fn inner(&self) -> &Landau {
        &self.inner
    }

    /// Trap strength.
    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    /// Trap level inside the `j`-th ladder gap: the root of `Q0 + alpha0`.
    pub fn dot_level(&self, j: usize) -> Result<f64> {
        let gap = self.inner.gap(j)?;
        let origin = Point::new(0.0, 0.0);
        let root = find_root_in_gap(
            |e| Ok(self.inner.q_function(e, origin)? + self.alpha0),
            gap,
            &Tolerance::default(),
        )?;
        root.ok_or_else(|| {
            Error::domain(
                "zero-range dot",
                format!("no trap level found in ladder gap {j}, which should be impossible"),
            )
        })
    }

    /// `Q0 + alpha0`, guarded against the trap-level pole.
    fn denominator(&self, e: f64) -> Result<f64> {
        let d = self.inner.q_function(e, Point::new(0.0, 0.0))? + self.alpha0;
        if d.abs() < INNER_POLE_GUARD {
            return Err(Error::InnerPole { energy: e });
        }
        Ok(d)
    }

    /// Field kernel against the origin (real by gauge choice).
    fn trap_column(&self, p: Point, e: f64) -> Result<f64> {
        if p.norm() == 0.0 {
            return Err(Error::domain(
                "zero-range dot",
                "site coincides with the trap at the origin",
            ));
        }
        Ok(self.inner.green(p, Point::new(0.0, 0.0), e)?.re)
    }

    /// Energy derivative of the trap column.
    fn trap_column_energy_derivative(&self, p: Point, e: f64) -> Result<f64> {
        Ok(self
            .inner
            .green_energy_derivative(p, Point::new(0.0, 0.0), e)?
            .re)
    }
}

impl Background for ZeroRangeDot {
    fn name(&self) -> &'static str {
        "zero-range"
    }

    fn charge_sign(&self) -> ChargeSign {
        self.inner.charge_sign()
    }

    fn xi0(&self) -> f64 {
        self.inner.xi0()
    }

    fn gap(&self, k: usize) -> Result<Gap> {
        if k == 0 {
            return Gap::new(f64::NEG_INFINITY, self.dot_level(0)?);
        }
        let j = (k - 1) / 2;
        let level = self.inner.level(j);
        if k % 2 == 1 {
            Gap::new(self.dot_level(j)?, level)
        } else {
            Gap::new(level, self.dot_level(j + 1)?)
        }
    }

    fn q_function(&self, e: f64, site: Point) -> Result<f64> {
        let q0 = self.inner.q_function(e, site)?;
        let g = self.trap_column(site, e)?;
        Ok(q0 - g * g / self.denominator(e)?)
    }

    fn q_derivative(&self, e: f64, site: Point) -> Result<f64> {
        let q0p = self.inner.q_derivative(e, site)?;
        let d = self.denominator(e)?;
        let g = self.trap_column(site, e)?;
        let ge = self.trap_column_energy_derivative(site, e)?;
        Ok(q0p * (1.0 + g * g / (d * d)) - 2.0 * g * ge / d)
    }

    fn green(&self, r: Point, site: Point, e: f64) -> Result<Complex64> {
        let direct = self.inner.green(r, site, e)?;
        let d = self.denominator(e)?;
        let to_r = self.inner.green(r, Point::new(0.0, 0.0), e)?;
        let from_s = self.inner.green(Point::new(0.0, 0.0), site, e)?;
        Ok(direct - to_r * from_s / d)
    }

    fn decay_radius(&self, e: f64) -> f64 {
        self.inner.decay_radius(e)
    }

    fn angular_momentum(&self, e0: f64, site: Point) -> Result<f64> {
        // The trap column carries zero angular momentum about the origin, so
        // the mean rescales the pure-field value by the weight the direct
        // kernel keeps in the normalized state.
        let q0p = self.inner.q_derivative(e0, site)?;
        let qp = self.q_derivative(e0, site)?;
        Ok(self.inner.angular_momentum(e0, site)? * q0p / qp)
    }

    fn rebuilt_at_xi0(&self, xi0: f64) -> Result<Box<dyn Background>> {
        let sign = self.inner.charge_sign();
        let b0 = 2.0 * PI * sign.sign() * xi0;
        Ok(Box::new(ZeroRangeDot {
            inner: Landau::new(sign, b0)?,
            alpha0: self.alpha0,
        }))
    }
}
