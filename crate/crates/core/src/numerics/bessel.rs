//! Modified Bessel functions `I_nu`, `K_nu` of real non-negative order.
//!
//! The angular-momentum channels of a flux-line background carry fractional
//! orders `nu = |m - sigma eta|`, so integer-order shortcuts do not apply.
//! The evaluation follows the classic two-regime scheme: a Temme series for
//! `x < 2` and Steed's continued fraction CF2 for `x >= 2`, glued by the CF1
//! ratio, a downward order recurrence, and the Wronskian
//! `I_nu(x) K_{nu+1}(x) + I_{nu+1}(x) K_nu(x) = 1/x`.
//!
//! Order ladders `nu0, nu0+1, ..., nu0+n` are produced in bulk: `K` by its
//! stable upward recurrence, `I` by Miller's normalized downward recurrence.
//! Ladders are returned exponentially scaled (`I e^{-x}`, `K e^{+x}`) so
//! mixed-argument products never overflow.

use super::gamma::gamma_pair;
use crate::error::{Error, Result};
use std::f64::consts::PI;

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-291;
const MAX_ITER: usize = 10_000;
/// Regime boundary between the Temme series and Steed's CF2.
const TEMME_EDGE: f64 = 2.0;

/// Values of `I_nu`, `K_nu` and their x-derivatives at one point.
#[derive(Debug, Clone, Copy)]
pub struct BesselIK {
    /// `I_nu(x)`, scaled by `e^{-x}` in the scaled variant.
    pub i: f64,
    /// `K_nu(x)`, scaled by `e^{+x}` in the scaled variant.
    pub k: f64,
    /// `dI_nu/dx`, same scaling as `i`.
    pub ip: f64,
    /// `dK_nu/dx`, same scaling as `k`.
    pub kp: f64,
}

/// `I_nu(x)`, `K_nu(x)` and derivatives, unscaled.
///
/// Errors with [`Error::Overflow`] once `e^{x}` leaves f64 range; use
/// [`bessik_scaled`] there.
pub fn bessik(nu: f64, x: f64) -> Result<BesselIK> {
    let out = bessik_impl(nu, x, false)?;
    if !(out.i.is_finite() && out.k.is_finite() && out.ip.is_finite() && out.kp.is_finite()) {
        return Err(Error::Overflow("bessik"));
    }
    Ok(out)
}

/// `I_nu(x) e^{-x}`, `K_nu(x) e^{+x}` and matching derivative scalings.
pub fn bessik_scaled(nu: f64, x: f64) -> Result<BesselIK> {
    bessik_impl(nu, x, true)
}

fn bessik_impl(nu: f64, x: f64, scaled: bool) -> Result<BesselIK> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::domain("bessik", format!("requires x > 0, got {x}")));
    }
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(Error::domain(
            "bessik",
            format!("requires nu >= 0, got {nu}"),
        ));
    }
    let nl = (nu + 0.5).floor() as usize; // shift count so that mu in [-1/2, 1/2]
    let mu = nu - nl as f64;
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;

    // CF1: h = I'_nu / I_nu by modified Lentz.
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAX_ITER {
        b += xi2;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::MaxIterations {
            context: "bessik CF1",
            max_iter: MAX_ITER,
        });
    }

    // Downward recurrence of unnormalized I, I' from nu to mu. Rescale on
    // the fly: only the ratios survive into the final normalization.
    let mut ril = FPMIN;
    let mut ripl = h * ril;
    let mut ril1 = ril; // saved unnormalized I_nu
    let mut rip1 = ripl; // saved unnormalized I'_nu
    let mut fact = nu * xi;
    for _ in 0..nl {
        let ritemp = fact * ril + ripl;
        fact -= xi;
        ripl = fact * ritemp + ril;
        ril = ritemp;
        if ril.abs() > 1e250 {
            ril *= 1e-250;
            ripl *= 1e-250;
            ril1 *= 1e-250;
            rip1 *= 1e-250;
        }
    }
    let f = ripl / ril; // I'_mu / I_mu

    // K_mu and K_{mu+1}, scaled by e^{+x} when requested.
    let (mut rkmu, mut rk1) = if x < TEMME_EDGE {
        let (k0, k1) = temme_k(mu, x)?;
        let s = if scaled { x.exp() } else { 1.0 };
        (k0 * s, k1 * s)
    } else {
        let (k0s, k1s) = steed_cf2(mu, mu2, x)?;
        if scaled {
            (k0s, k1s)
        } else {
            let e = (-x).exp();
            (k0s * e, k1s * e)
        }
    };

    let rkmup = mu * xi * rkmu - rk1;
    // Wronskian normalization: I_mu (I'_mu/I_mu K_mu - K'_mu) = 1/x.
    // In the scaled variant the e^{+x} on K makes this I_mu e^{-x} directly.
    let rimu = xi / (f * rkmu - rkmup);
    let ri = rimu * (ril1 / ril);
    let rip = rimu * (rip1 / ril);

    // Upward recurrence for K from mu to nu.
    for i in 1..=nl {
        let rktemp = (mu + i as f64) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = rktemp;
    }
    let rk = rkmu;
    let rkp = nu * xi * rkmu - rk1;
    Ok(BesselIK {
        i: ri,
        k: rk,
        ip: rip,
        kp: rkp,
    })
}

/// Temme's series for `K_mu(x)`, `K_{mu+1}(x)`, `|mu| <= 1/2`, `x < 2`.
fn temme_k(mu: f64, x: f64) -> Result<(f64, f64)> {
    let mu2 = mu * mu;
    let x2 = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < 1e-12 {
        1.0
    } else {
        pimu / pimu.sin()
    };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < 1e-12 { 1.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = gamma_pair(mu)?;
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let e = e.exp();
    let mut p = 0.5 * e / gampl;
    let mut q = 0.5 / (e * gammi);
    let mut cc = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    let mut done = false;
    for i in 1..=MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        cc *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = cc * ff;
        sum += del;
        let del1 = cc * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::MaxIterations {
            context: "bessik Temme series",
            max_iter: MAX_ITER,
        });
    }
    Ok((sum, sum1 * 2.0 / x))
}

/// Steed's CF2 for `K_mu(x) e^{+x}`, `K_{mu+1}(x) e^{+x}`, `x >= 2`.
fn steed_cf2(mu: f64, mu2: f64, x: f64) -> Result<(f64, f64)> {
    let xi = 1.0 / x;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = delh;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu2;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    let mut done = false;
    for i in 2..=MAX_ITER {
        a -= 2.0 * (i as f64 - 1.0);
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::MaxIterations {
            context: "bessik CF2",
            max_iter: MAX_ITER,
        });
    }
    let h = a1 * h;
    let rkmu = (PI / (2.0 * x)).sqrt() / s; // e^{+x}-scaled K_mu
    let rk1 = rkmu * (mu + x + 0.5 - h) * xi;
    Ok((rkmu, rk1))
}

/// Product `I_nu(x) K_nu(x)` by the cross-series
/// `S+ S- / (2 nu)` with `S± = sum_k (x^2/4)^k / (k! (1 ± nu)_k)`,
/// valid for large order and small argument (`nu >= 10`, `x^2 <= 0.04 nu`,
/// `nu` bounded away from integers). Used as an independent check on the
/// ladder products.
pub(crate) fn ik_product_small_x(nu: f64, x: f64) -> Option<f64> {
    if nu < 10.0 || x * x > 0.04 * nu || (nu - nu.round()).abs() < 0.01 {
        return None;
    }
    let q = 0.25 * x * x;
    let series = |sign: f64| -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 0..60 {
            let kf = k as f64;
            term *= q / ((kf + 1.0) * (kf + 1.0 + sign * nu));
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    };
    Some(series(1.0) * series(-1.0) / (2.0 * nu))
}

/// Exponentially scaled order ladder at fixed argument:
/// returns `(ie, ke)` with `ie[j] = I_{nu0+j}(x) e^{-x}` and
/// `ke[j] = K_{nu0+j}(x) e^{+x}` for `j = 0..=n`.
///
/// `K` ascends by its recurrence (stable upward); `I` descends by Miller's
/// method from a padded trial order, normalized against `bessik_scaled` at
/// the base order.
pub(crate) fn ik_scaled_ladder(nu0: f64, x: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::domain(
            "ik_scaled_ladder",
            format!("requires x > 0, got {x}"),
        ));
    }
    if !(nu0.is_finite() && nu0 >= 0.0) {
        return Err(Error::domain(
            "ik_scaled_ladder",
            format!("requires nu0 >= 0, got {nu0}"),
        ));
    }
    let base = bessik_scaled(nu0, x)?;
    let next = bessik_scaled(nu0 + 1.0, x)?;

    // Upward K: K_{nu+1} = K_{nu-1} + (2 nu / x) K_nu.
    let mut ke = Vec::with_capacity(n + 1);
    ke.push(base.k);
    if n >= 1 {
        ke.push(next.k);
        for j in 1..n {
            let nu = nu0 + j as f64;
            let val = ke[j - 1] + (2.0 * nu / x) * ke[j];
            if !val.is_finite() {
                return Err(Error::Overflow("K ladder"));
            }
            ke.push(val);
        }
    }

    // Downward I by Miller: trial chain from a padded top order, then
    // normalize so the base entry matches the direct evaluation.
    let pad = 30 + (1.5 * x) as usize;
    let top = n + pad;
    let mut trial = vec![0.0_f64; top + 2];
    trial[top + 1] = 0.0;
    trial[top] = FPMIN;
    for j in (0..top).rev() {
        let nu = nu0 + (j + 1) as f64;
        let val = trial[j + 2] + (2.0 * nu / x) * trial[j + 1];
        trial[j] = val;
        if val.abs() > 1e250 {
            for t in trial.iter_mut().skip(j) {
                *t *= 1e-250;
            }
        }
    }
    let scale = base.i / trial[0];
    let ie: Vec<f64> = trial[..=n].iter().map(|t| t * scale).collect();
    Ok((ie, ke))
}
