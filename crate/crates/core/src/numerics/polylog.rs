//! Complex polylogarithms `Li_1`, `Li_2`, `Li_3` on the closed unit disc.
//!
//! The large-order tail of an angular-momentum Green sum collapses onto
//! `sum_m t^m e^{i m phi} / m^p = Li_p(t e^{i phi})`, so completing those
//! tails analytically needs the first three polylogarithms at complex
//! arguments with `|z| < 1`. Inside `|z| <= 0.8` the defining series is
//! used directly; outside, the expansion around `z = 1` in `u = ln z`
//! (with zeta values at descending integer arguments) converges for
//! `|u| < 2 pi`, which covers the rest of the disc.

use super::gamma::{bernoulli_even, zeta_int};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Radius below which the defining series is summed directly.
const DIRECT_RADIUS: f64 = 0.8;

/// `Li_1(z) = -ln(1 - z)`.
pub fn li1(z: Complex64) -> Result<Complex64> {
    if (z - 1.0).norm() < 1e-14 {
        return Err(Error::domain("li1", "singular at z = 1"));
    }
    Ok(-(Complex64::new(1.0, 0.0) - z).ln())
}

/// `Li_2(z)` for `|z| <= 1`, excluding a small disc around `z = 1`.
pub fn li2(z: Complex64) -> Result<Complex64> {
    polylog_low(z, 2)
}

/// `Li_3(z)` for `|z| <= 1`, excluding a small disc around `z = 1`.
pub fn li3(z: Complex64) -> Result<Complex64> {
    polylog_low(z, 3)
}

fn polylog_low(z: Complex64, n: u32) -> Result<Complex64> {
    let r = z.norm();
    if !(z.re.is_finite() && z.im.is_finite()) || r > 1.0 + 1e-12 {
        return Err(Error::domain(
            "polylog",
            format!("requires |z| <= 1, got |z| = {r}"),
        ));
    }
    if (z - 1.0).norm() < 1e-14 {
        // Li_2, Li_3 are finite at 1 but the ln(-u) expansion degenerates;
        // the Green tails never hit this point (it is the coincidence limit).
        return Err(Error::domain("polylog", "evaluation at z = 1"));
    }
    if r <= DIRECT_RADIUS {
        return Ok(direct_series(z, n));
    }
    Ok(log_expansion(z, n))
}

fn direct_series(z: Complex64, n: u32) -> Complex64 {
    let mut power = z;
    let mut sum = Complex64::new(0.0, 0.0);
    for m in 1..400 {
        let term = power / (m as f64).powi(n as i32);
        sum += term;
        if term.norm() < 1e-18 * sum.norm().max(1e-30) {
            break;
        }
        power *= z;
    }
    sum
}

/// Expansion in `u = ln z` around `z = 1`:
/// `Li_n(e^u) = sum_{k >= 0, k != n-1} zeta(n-k) u^k / k!
///            + u^{n-1} (H_{n-1} - ln(-u)) / (n-1)!`,
/// with `zeta(0) = -1/2`, `zeta(-2m) = 0`, `zeta(1-2m) = -B_{2m}/(2m)`.
fn log_expansion(z: Complex64, n: u32) -> Complex64 {
    let u = z.ln(); // principal branch; Re u <= 0 on the unit disc
    let bern = bernoulli_even();
    let harmonic = match n {
        2 => 1.0,
        3 => 1.5,
        _ => unreachable!("only n = 2, 3 supported"),
    };
    let nm1 = (n - 1) as usize;
    // factorial(n-1)
    let fact_nm1 = if nm1 == 1 { 1.0 } else { 2.0 };
    let mut sum = Complex64::new(0.0, 0.0);
    // Positive-zeta head: k < n-1 uses zeta(n-k) with n-k >= 2.
    let mut u_pow = Complex64::new(1.0, 0.0);
    let mut k_fact = 1.0;
    for k in 0..nm1 {
        sum += u_pow * (zeta_int((n as usize) - k) / k_fact);
        u_pow *= u;
        k_fact *= (k + 1) as f64;
    }
    // Logarithmic term at k = n-1.
    sum += u_pow * (Complex64::new(harmonic, 0.0) - (-u).ln()) / fact_nm1;
    u_pow *= u;
    k_fact *= n as f64;
    // k = n: zeta(0) = -1/2.
    sum += u_pow * (-0.5 / k_fact);
    // Remaining terms: zeta at negative integers; even ones vanish.
    // zeta(1-2m) = -B_{2m}/(2m) sits at k = n - 1 + 2m.
    let mut kf = k_fact;
    let mut up = u_pow;
    let mut k = n as usize;
    for m in 1..=bern.len() {
        let k_target = nm1 + 2 * m;
        while k < k_target {
            up *= u;
            k += 1;
            kf *= k as f64;
        }
        let term = up * (-bern[m - 1] / (2.0 * m as f64) / kf);
        sum += term;
        if term.norm() < 1e-18 * sum.norm().max(1e-30) && m > 4 {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    // reference: 25-digit multiprecision evaluations
    const LI2_HALF: f64 = 0.582_240_526_465_012_505_9;
    const LI3_HALF: f64 = 0.537_213_193_608_040_200_9;
    const LI2_ZC_RE: f64 = 1.471_103_550_208_570_615;
    const LI2_ZC_IM: f64 = 0.064_003_942_144_299_379_55;
    const LI3_ZC_RE: f64 = 1.139_412_348_087_534_241;
    const LI3_ZC_IM: f64 = 0.029_484_410_153_034_341_45;

    #[test]
    fn real_half_values() {
        let z = Complex64::new(0.5, 0.0);
        assert_relative_eq!(li2(z).unwrap().re, LI2_HALF, max_relative = 1e-13);
        assert!(li2(z).unwrap().im.abs() < 1e-16);
        assert_relative_eq!(li3(z).unwrap().re, LI3_HALF, max_relative = 1e-13);
        // Closed form: Li_2(1/2) = pi^2/12 - ln^2(2)/2.
        let closed = PI * PI / 12.0 - 0.5 * (2.0_f64).ln().powi(2);
        assert_relative_eq!(li2(z).unwrap().re, closed, max_relative = 1e-14);
    }

    #[test]
    fn near_unit_circle_values() {
        // z = 0.9608 e^{0.02 i}: exercises the ln z expansion close to z = 1.
        let z = Complex64::from_polar(0.9608, 0.02);
        let v2 = li2(z).unwrap();
        assert_relative_eq!(v2.re, LI2_ZC_RE, max_relative = 1e-12);
        assert_relative_eq!(v2.im, LI2_ZC_IM, max_relative = 1e-12);
        let v3 = li3(z).unwrap();
        assert_relative_eq!(v3.re, LI3_ZC_RE, max_relative = 1e-12);
        assert_relative_eq!(v3.im, LI3_ZC_IM, max_relative = 1e-12);
    }

    #[test]
    fn routes_agree_on_their_boundary() {
        for j in 0..12 {
            let phi = 0.3 + j as f64 * 0.5;
            let z = Complex64::from_polar(0.8, phi);
            let a2 = direct_series(z, 2);
            let b2 = log_expansion(z, 2);
            assert!((a2 - b2).norm() < 1e-12 * a2.norm().max(1.0));
            let a3 = direct_series(z, 3);
            let b3 = log_expansion(z, 3);
            assert!((a3 - b3).norm() < 1e-12 * a3.norm().max(1.0));
        }
    }

    #[test]
    fn li1_is_the_logarithm() {
        let z = Complex64::from_polar(0.93, 2.4);
        let v = li1(z).unwrap();
        let want = -(Complex64::new(1.0, 0.0) - z).ln();
        assert!((v - want).norm() < 1e-15);
    }

    #[test]
    fn rejects_z_equal_one_and_outside_disc() {
        assert!(li2(Complex64::new(1.0, 0.0)).is_err());
        assert!(li2(Complex64::new(1.3, 0.2)).is_err());
        assert!(li1(Complex64::new(1.0, 0.0)).is_err());
    }
}
