//! Bracketed root finding (Brent's method).
//!
//! Spectral conditions in this crate are strictly monotone inside a gap, so
//! a sign-changing bracket pins down exactly one root. Brent's combination
//! of bisection, secant, and inverse quadratic steps is derivative-free,
//! deterministic, and guaranteed to converge once a bracket is supplied.

use super::Tolerance;
use crate::error::{Error, Result};

/// A converged root.
#[derive(Debug, Clone, Copy)]
pub struct RootOutcome {
    /// Abscissa of the root.
    pub root: f64,
    /// Residual function value at the root.
    pub residual: f64,
    /// Iterations consumed.
    pub iterations: usize,
}

/// Find the root of `f` inside `[a, b]`, requiring a sign change.
///
/// Terminates when the bracket width falls below
/// `abs_tol + rel_tol * |x|` or the residual is exactly zero.
pub fn brent<F>(mut f: F, a: f64, b: f64, tol: &Tolerance) -> Result<RootOutcome>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::domain(
            "brent",
            format!("invalid bracket [{a}, {b}]"),
        ));
    }
    let fa0 = f(a)?;
    let fb0 = f(b)?;
    if fa0 == 0.0 {
        return Ok(RootOutcome {
            root: a,
            residual: 0.0,
            iterations: 0,
        });
    }
    if fb0 == 0.0 {
        return Ok(RootOutcome {
            root: b,
            residual: 0.0,
            iterations: 0,
        });
    }
    if fa0.signum() == fb0.signum() {
        return Err(Error::NoSignChange {
            lo: a,
            hi: b,
            flo: fa0,
            fhi: fb0,
        });
    }

    let (mut xa, mut xb) = (a, b);
    let (mut fa, mut fb) = (fa0, fb0);
    let mut xc = xa;
    let mut fc = fa;
    let mut d = xb - xa;
    let mut e = d;

    for iter in 1..=tol.max_iter {
        if fb.abs() > fc.abs() {
            // b must carry the best (smallest-residual) iterate.
            xa = xb;
            xb = xc;
            xc = xa;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let xtol = 2.0 * f64::EPSILON * xb.abs() + 0.5 * (tol.abs_tol + tol.rel_tol * xb.abs());
        let xm = 0.5 * (xc - xb);
        if xm.abs() <= xtol || fb == 0.0 {
            return Ok(RootOutcome {
                root: xb,
                residual: fb,
                iterations: iter,
            });
        }
        if e.abs() >= xtol && fa.abs() > fb.abs() {
            // Attempt inverse quadratic interpolation (secant if degenerate).
            let s = fb / fa;
            let (mut p, mut q) = if xa == xc {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q0 * (q0 - r) - (xb - xa) * (r - 1.0)),
                    (q0 - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (xtol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        xa = xb;
        fa = fb;
        xb += if d.abs() > xtol {
            d
        } else if xm > 0.0 {
            xtol
        } else {
            -xtol
        };
        fb = f(xb)?;
        if (fb > 0.0) == (fc > 0.0) {
            xc = xa;
            fc = fa;
            d = xb - xa;
            e = d;
        }
    }
    Err(Error::MaxIterations {
        context: "brent",
        max_iter: tol.max_iter,
    })
}
