//! Uniform magnetic field plus an isotropic quadratic trap `omega0^2 r^2 / 8`.
//!
//! The trap and the field `b0` combine into the effective frequency
//! `omega = sqrt(b0^2 + omega0^2)`, and the spectrum is the Zeeman-split
//! oscillator ladder
//! `E_{n m} = omega (n + (|m| + 1)/2) - sigma omega_c m / 2`
//! (`sigma` the sign of the flux seen by the carrier, `omega_c = |b0|`).
//! Above the ground level `omega/2` the ladder is dense for generic
//! frequency ratios, so only the bottom gap `(-inf, omega/2)` is exposed.
//!
//! Everything is computed from the Laplace transform of the heat kernel.
//! The kernel of `(H - E)^{-1}` is a single semi-infinite integral, and the
//! regularized diagonal splits as
//! `Q(E; rho) = (omega/2pi) J(E; rho) + Q_c(E)`, where `Q_c` is the closed
//! digamma form of the trap-center diagonal and `J` is a bounded integral
//! that vanishes at the center. All hyperbolic ratios are evaluated in
//! `expm1` product form so the integrands stay stable from `t -> 0` through
//! the deep exponential tail.

use super::{require_distinct, Background};
use crate::error::{Error, Result};
use crate::model::{ChargeSign, Gap, Point};
use crate::numerics::gamma::{digamma, trigamma_any, EULER_GAMMA};
use crate::numerics::quad::{integrate_semi_infinite, integrate_semi_infinite_complex};
use crate::numerics::Tolerance;
use num_complex::Complex64;
use std::f64::consts::{LN_2, PI};

/// Real exponents below this underflow `exp` to zero; integrands short-cut
/// to an exact zero there so no large cofactor can turn the value into NaN.
const EXP_FLOOR: f64 = -745.0;

/// Harmonically trapped background.
#[derive(Debug, Clone)]
pub struct ParabolicDot {
    charge_sign: ChargeSign,
    b0: f64,
    omega0: f64,
}

impl ParabolicDot {
    /// Construct for flux density `b0` (any sign, possibly zero) and trap
    /// frequency `omega0 > 0`.
    pub fn new(charge_sign: ChargeSign, b0: f64, omega0: f64) -> Result<Self> {
        if !b0.is_finite() {
            return Err(Error::domain(
                "parabolic dot",
                format!("flux density must be finite, got {b0}"),
            ));
        }
        if !omega0.is_finite() || omega0 <= 0.0 {
            return Err(Error::domain(
                "parabolic dot",
                format!("requires a positive trap frequency, got {omega0}"),
            ));
        }
        Ok(ParabolicDot {
            charge_sign,
            b0,
            omega0,
        })
    }

    /// Cyclotron frequency `|b0|`.
    pub fn omega_c(&self) -> f64 {
        self.b0.abs()
    }

    /// Effective trap frequency `sqrt(b0^2 + omega0^2)`.
    pub fn omega(&self) -> f64 {
        self.b0.hypot(self.omega0)
    }

    /// Sign of the flux seen by the carrier (zero in zero field).
    fn sigma(&self) -> f64 {
        if self.b0 == 0.0 {
            0.0
        } else {
            self.charge_sign.sign() * self.b0.signum()
        }
    }

    /// Ladder level `E_{n m}`.
    pub fn level(&self, n: usize, m: i64) -> f64 {
        let om = self.omega();
        om * (n as f64 + (m.unsigned_abs() as f64 + 1.0) / 2.0)
            - 0.5 * self.sigma() * self.omega_c() * m as f64
    }

    fn check_gap(&self, e: f64) -> Result<()> {
        let top = 0.5 * self.omega();
        if e < top {
            Ok(())
        } else {
            Err(Error::OutsideGap {
                energy: e,
                lo: f64::NEG_INFINITY,
                hi: top,
            })
        }
    }

    /// Trap-center diagonal: the oscillator ladder alone, in closed form.
    fn q_center(&self, e: f64) -> Result<f64> {
        let om = self.omega();
        Ok(-(digamma(0.5 - e / om)? + 2.0 * EULER_GAMMA - LN_2 + om.ln()) / (2.0 * PI))
    }

    /// Off-center correction integral `J` (or `dJ/dE` with the extra `2t`).
    fn offset_integral(&self, e: f64, rho_sq: f64, energy_deriv: bool) -> Result<f64> {
        let om = self.omega();
        let oc = self.omega_c();
        let c = 0.5 * om * rho_sq;
        let tol = Tolerance::default();
        let out = integrate_semi_infinite(
            |t| {
                let e2 = (-2.0 * om * t).exp_m1();
                let g = (-(om + oc) * t).exp_m1() * (-(om - oc) * t).exp_m1() / (-e2);
                let re = (2.0 * e - om) * t;
                if !(re > EXP_FLOOR) {
                    return Ok(0.0);
                }
                let base = -2.0 * re.exp() * (-c * g).exp_m1() / e2;
                Ok(if energy_deriv { 2.0 * t * base } else { base })
            },
            0.0,
            &tol,
        )?;
        Ok(out.value)
    }
}

impl Background for ParabolicDot {
    fn name(&self) -> &'static str {
        "dot"
    }

    fn charge_sign(&self) -> ChargeSign {
        self.charge_sign
    }

    fn xi0(&self) -> f64 {
        self.charge_sign.sign() * self.b0 / (2.0 * PI)
    }

    fn gap(&self, k: usize) -> Result<Gap> {
        if k == 0 {
            Gap::new(f64::NEG_INFINITY, 0.5 * self.omega())
        } else {
            Err(Error::GapUnavailable {
                index: k,
                background: "dot",
                reason: "the ladder above the ground level is dense for generic frequencies",
            })
        }
    }

    fn q_function(&self, e: f64, site: Point) -> Result<f64> {
        self.check_gap(e)?;
        let base = self.q_center(e)?;
        let rho_sq = site.dot(site);
        if rho_sq == 0.0 {
            return Ok(base);
        }
        let j = self.offset_integral(e, rho_sq, false)?;
        Ok(self.omega() / (2.0 * PI) * j + base)
    }

    fn q_derivative(&self, e: f64, site: Point) -> Result<f64> {
        self.check_gap(e)?;
        let om = self.omega();
        let center = trigamma_any(0.5 - e / om)? / (2.0 * PI * om);
        let rho_sq = site.dot(site);
        if rho_sq == 0.0 {
            return Ok(center);
        }
        let jp = self.offset_integral(e, rho_sq, true)?;
        Ok(om / (2.0 * PI) * jp + center)
    }

    fn green(&self, r: Point, site: Point, e: f64) -> Result<Complex64> {
        let d = require_distinct(r, site)?;
        self.check_gap(e)?;
        let om = self.omega();
        let oc = self.omega_c();
        let radii_sq = r.dot(r) + site.dot(site);
        let d_sq = d * d;
        let wedge = r.wedge(site);
        let cw = 0.5 * self.sigma() * om;
        let tol = Tolerance::default();
        let kernel = |t: f64| {
            let e2 = (-2.0 * om * t).exp_m1();
            let g = (-(om + oc) * t).exp_m1() * (-(om - oc) * t).exp_m1() / (-e2);
            let decay = (-(om - oc) * t).exp();
            // cosh(oc t)/sinh(om t) and sinh(oc t)/sinh(om t).
            let ratio_c = decay * (1.0 + (-2.0 * oc * t).exp()) / (-e2);
            let ratio_s = decay * (-2.0 * oc * t).exp_m1() / e2;
            let re = (2.0 * e - om) * t - 0.25 * om * (radii_sq * g + d_sq * ratio_c);
            if !(re > EXP_FLOOR) {
                return Complex64::new(0.0, 0.0);
            }
            let mag = -2.0 * re.exp() / e2;
            mag * Complex64::from_polar(1.0, -cw * wedge * ratio_s)
        };
        // The kernel ramps up through e^{-d^2/(4t)} near t = 0; for small
        // separations the ramp sits many decades below the cutoff t*, so the
        // lower piece is integrated in log-time where the ramp has unit width.
        let t_star = 1.0 / om;
        let lower = integrate_semi_infinite_complex(
            |v| {
                let t = t_star * (-v).exp();
                Ok(kernel(t) * t)
            },
            0.0,
            &tol,
        )?;
        let upper = integrate_semi_infinite_complex(|t| Ok(kernel(t)), t_star, &tol)?;
        Ok(om / (2.0 * PI) * (lower.value + upper.value))
    }

    fn decay_radius(&self, e: f64) -> f64 {
        let om = self.omega();
        let a = 0.5 - e / om;
        let mut u = 45.0 + a.abs() * 90.0_f64.ln();
        u = 45.0 + a.abs() * (2.0 * u).ln().max(1.0);
        2.0 * (u / om).sqrt()
    }

    fn rebuilt_at_xi0(&self, xi0: f64) -> Result<Box<dyn Background>> {
        let b0 = 2.0 * PI * self.charge_sign.sign() * xi0;
        Ok(Box::new(ParabolicDot::new(
            self.charge_sign,
            b0,
            self.omega0,
        )?))
    }
}
