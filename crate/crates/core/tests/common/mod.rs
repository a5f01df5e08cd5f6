//! Shared oracle machinery for the integration suite.
//!
//! The production Green functions are closed forms: a confluent
//! hypergeometric expression for the uniform field, a modified-Bessel
//! partial-wave sum for the flux line, and a propagator-time quadrature
//! for the confined field.  The oracles here rebuild the same kernels
//! from the defining radial problem instead, so the two routes share no
//! code path beyond scalar arithmetic:
//!
//! * every angular channel `m` solves
//!   `u'' + u'/r - [nu^2/r^2 + q r^2 + c] u = 0`
//!   with `nu = |m|`, `q = omega^2/4` and `c = -sigma_e b0 m - 2E`;
//! * the regular solution comes from the Frobenius series at the origin,
//!   which converges everywhere and is evaluated directly at the target
//!   radii (its coefficients obey `4k(nu+k) a_k = c a_{k-1} + q a_{k-2}`);
//! * the decaying solution starts from the asymptotic form
//!   `r^b e^{-sqrt(q) r^2/2} (1 + d1/r^2)` far outside the outer radius
//!   and is integrated inward with fixed-step RK4.  Start-vector error
//!   only admixes the *growing* solution; the admixture shrinks by the
//!   ratio of the two envelopes across the overshoot, which is
//!   `exp(-q^{1/2}(r_max^2 - r_>^2))` times a power-law factor
//!   `(r_max/r_>)^{2|b|}`-ish, so the start radius is pushed out until
//!   the log of that ratio clears a fixed margin.  Any overall rescale
//!   of the start cancels in the Wronskian-normalised kernel;
//! * each channel contributes `g_m = -2 u(r_<) v(r_>) / W0` with
//!   `W0 = r (u v' - u' v)` constant in `r`, and the full kernel is
//!   `G = (1/2pi) sum_m e^{i m (phi_r - phi_s)} g_m`;
//! * runs at step counts `n` and `2n` are combined by Richardson
//!   extrapolation, which removes the leading `h^4` error of RK4.
//!
//! Channel magnitudes fall geometrically like `(r_</r_>)^nu`, so once
//! the walk sees only increments below `1e-9` of the running scale it
//! downgrades the remaining channels to a cheaper accuracy tier; their
//! absolute contribution to the sum is below `1e-15` of the result.
//!
//! The flux-line background needs no ODE at all: `I_nu` comes from its
//! ascending series and `K_nu` from the reflection formula
//! `K_nu = pi (I_{-nu} - I_nu) / (2 sin(pi nu))`, valid away from integer
//! orders.  Both routes are anchored by `ln_gamma`, which is verified
//! against multiprecision references elsewhere in the suite.

#![allow(dead_code)]

use num_complex::Complex64;
use pointflux_core::model::Point;
use pointflux_core::numerics::gamma::ln_gamma;
use std::f64::consts::{PI, TAU};

/// Widest angular window any oracle sum may need; the geometric channel
/// decay stops the walk earlier at the radius ratios the tests use.
const CHANNEL_CAP: i64 = 128;

/// Consecutive negligible channel pairs required before the sum stops.
const QUIET_PAIRS: usize = 3;

/// Accuracy tier for one radial channel.
#[derive(Clone, Copy)]
pub struct Quality {
    /// Per-run RK4 error target before Richardson extrapolation.
    rk4_target: f64,
    /// Log-margin the growing-solution admixture must be suppressed by.
    overshoot: f64,
}

pub const FINE: Quality = Quality {
    rk4_target: 1.0e-9,
    overshoot: 90.0,
};

/// For channels already known to sit below `1e-9` of the running scale.
const ROUGH: Quality = Quality {
    rk4_target: 3.0e-7,
    overshoot: 45.0,
};

/// Rotationally symmetric background solved channel by channel.
pub struct RadialOracle {
    /// Signed cyclotron coupling `sigma_e * b0` of the angular momentum.
    signed_field: f64,
    /// Squared hybrid frequency `b0^2 + omega0^2`.
    hybrid_sq: f64,
}

impl RadialOracle {
    /// Uniform field `b0` seen by a carrier of the given charge sign.
    pub fn uniform(charge: f64, b0: f64) -> Self {
        assert!(b0 > 0.0, "oracle field must be positive");
        RadialOracle {
            signed_field: charge * b0,
            hybrid_sq: b0 * b0,
        }
    }

    /// Uniform field plus a parabolic trap of frequency `omega0`.
    pub fn trap(charge: f64, b0: f64, omega0: f64) -> Self {
        assert!(b0 > 0.0 && omega0 >= 0.0, "oracle trap must be confining");
        RadialOracle {
            signed_field: charge * b0,
            hybrid_sq: b0 * b0 + omega0 * omega0,
        }
    }

    /// Green function `G(r, s; e)` below the spectrum, by partial waves.
    pub fn green(&self, r: Point, s: Point, e: f64) -> Complex64 {
        let (rho_r, rho_s) = (r.norm(), s.norm());
        let (r_lt, r_gt) = if rho_r <= rho_s {
            (rho_r, rho_s)
        } else {
            (rho_s, rho_r)
        };
        assert!(r_gt > 0.0, "oracle needs one point off the origin");

        if r_lt < 1.0e-14 {
            // Only the isotropic channel survives a source at the origin.
            return Complex64::new(self.channel(0, e, r_lt, r_gt, FINE) / TAU, 0.0);
        }

        let dphi = r.angle() - s.angle();
        let mut acc = Complex64::new(self.channel(0, e, r_lt, r_gt, FINE) / TAU, 0.0);
        let mut scale = acc.norm();
        let mut quiet = 0;
        let mut faint = 0;
        for m in 1..=CHANNEL_CAP {
            let quality = if faint >= 2 { ROUGH } else { FINE };
            let g_pos = self.channel(m, e, r_lt, r_gt, quality);
            let g_neg = self.channel(-m, e, r_lt, r_gt, quality);
            let swing = (m as f64) * dphi;
            let inc = (Complex64::from_polar(1.0, swing) * g_pos
                + Complex64::from_polar(1.0, -swing) * g_neg)
                / TAU;
            acc += inc;
            scale = scale.max(inc.norm());
            if inc.norm() < 1.0e-9 * scale {
                faint += 1;
            }
            if inc.norm() < 1.0e-17 * scale {
                quiet += 1;
                if quiet >= QUIET_PAIRS {
                    return acc;
                }
            } else {
                quiet = 0;
            }
        }
        panic!("oracle channel window exhausted before the sum settled");
    }

    /// One-channel radial kernel `g_m(r_<, r_>)`, Richardson extrapolated.
    pub fn channel(&self, m: i64, e: f64, r_lt: f64, r_gt: f64, quality: Quality) -> f64 {
        let nu = m.unsigned_abs() as f64;
        let q = self.hybrid_sq / 4.0;
        let c = -self.signed_field * (m as f64) - 2.0 * e;

        let (u_in, _) = regular_series(nu, q, c, r_lt);
        let (u_out, du_out) = regular_series(nu, q, c, r_gt);

        let coarse = decaying_at(nu, q, c, r_gt, quality, 1);
        let fine = decaying_at(nu, q, c, r_gt, quality, 2);
        let g = |(v, dv): (f64, f64)| -> f64 {
            let wronskian = r_gt * (u_out * dv - du_out * v);
            -2.0 * u_in * v / wronskian
        };
        let (g1, g2) = (g(coarse), g(fine));
        (16.0 * g2 - g1) / 15.0
    }
}

/// Regular channel solution and derivative at `r`, from the Frobenius
/// series `u = r^nu sum_k a_k r^{2k}`.  The series is entire; at the
/// radii used by the tests its terms decay before cancellation can cost
/// precision, and the term scale is monitored to enforce that.
fn regular_series(nu: f64, q: f64, c: f64, r: f64) -> (f64, f64) {
    let r2 = r * r;
    let mut a_prev2 = 0.0;
    let mut a_prev = 1.0;
    let mut power = 1.0; // r^{2k}
    let mut sum0 = 1.0; // sum a_k r^{2k}
    let mut sum1 = 0.0; // sum 2k a_k r^{2k}
    let mut peak: f64 = 1.0;
    let mut k = 0usize;
    let mut tiny = 0usize;
    loop {
        k += 1;
        let kf = k as f64;
        let a_k = (c * a_prev + q * a_prev2) / (4.0 * kf * (nu + kf));
        a_prev2 = a_prev;
        a_prev = a_k;
        power *= r2;
        let term = a_k * power;
        sum0 += term;
        sum1 += 2.0 * kf * term;
        peak = peak.max(term.abs());
        // The recurrence couples k-1 and k-2, so a vanishing linear
        // coefficient zeroes every other term; one tiny term alone is not
        // evidence of convergence.
        if term.abs() < 1.0e-18 * sum0.abs().max(1.0e-280) {
            tiny += 1;
            if tiny >= 2 && k > 4 {
                break;
            }
        } else {
            tiny = 0;
        }
        assert!(k < 500, "regular series failed to converge");
    }
    assert!(
        peak < 1.0e8 * sum0.abs().max(1.0e-280),
        "regular series lost too many digits to cancellation"
    );
    let grade = r.powi(nu as i32);
    let value = grade * sum0;
    let slope = if r > 0.0 {
        grade / r * (nu * sum0 + sum1)
    } else {
        0.0
    };
    (value, slope)
}

/// Decaying channel solution and derivative at `r_gt`, integrated inward
/// from far outside with fixed-step RK4 at `mult` times the base step
/// density.  The start radius is pushed out until the growing solution's
/// envelope gain across the overshoot clears the requested log-margin.
fn decaying_at(
    nu: f64,
    q: f64,
    c: f64,
    r_gt: f64,
    quality: Quality,
    mult: usize,
) -> (f64, f64) {
    let beta = q.sqrt();
    assert!(beta > 0.0, "oracle decaying start needs a confining tail");
    let b = -1.0 - c / (2.0 * beta);

    // Envelope-ratio log gain of decaying over growing solution between
    // r_gt and r_big, with the power-law prefactors taken worst-case.
    let suppression = |r_big: f64| {
        beta * (r_big * r_big - r_gt * r_gt)
            - 2.0 * (b.abs() + nu + 2.0) * (r_big / r_gt).ln()
    };
    let mut r_max = (r_gt * r_gt + (quality.overshoot + 10.0) / beta).sqrt();
    while suppression(r_max) < quality.overshoot {
        r_max *= 1.15;
        assert!(r_max < 1.0e4, "decaying start radius ran away");
    }

    // The envelope prefactor of the start vector is an overall scale and
    // cancels in the Wronskian-normalised kernel, so the integration
    // carries the envelope-normalised solution and renormalises whenever
    // the inward growth approaches the representable range.
    let d1 = (nu * nu - b * b) / (4.0 * beta);
    let mut v = 1.0 + d1 / (r_max * r_max);
    let mut dv = (b / r_max - beta * r_max) * v - 2.0 * d1 / (r_max * r_max * r_max);

    // Three geometric segments grade the step to the local stiffness.
    let ratio = (r_max / r_gt).powf(1.0 / 3.0);
    let mut top = r_max;
    for seg in 0..3 {
        let bottom = if seg == 2 {
            r_gt
        } else {
            r_max / ratio.powi(seg as i32 + 1)
        };
        let stiffness = (nu / bottom).max(beta * top).max(c.abs().sqrt()) + 1.0;
        let steps = steps_for(top - bottom, stiffness, quality.rk4_target) * mult;
        let h = (bottom - top) / steps as f64;
        let mut r = top;
        for step in 0..steps {
            let (nv, ndv) = rk4_step(nu, q, c, r, v, dv, h);
            v = nv;
            dv = ndv;
            r += h;
            if step % 64 == 0 && v.abs() > 1.0e120 {
                dv /= v.abs();
                v /= v.abs();
            }
        }
        assert!(v.is_finite() && dv.is_finite(), "inward sweep overflowed");
        top = bottom;
    }
    (v, dv)
}

/// Step count keeping the pre-extrapolation RK4 error near `target`.
fn steps_for(span: f64, stiffness: f64, target: f64) -> usize {
    let sweep = (span * stiffness).max(1.0);
    let step_angle = (80.0 * target / sweep).powf(0.25).min(0.05);
    ((sweep / step_angle).ceil() as usize).max(160)
}

/// One RK4 step of `v' = w`, `w' = -w/r + f(r) v`.
fn rk4_step(nu: f64, q: f64, c: f64, r: f64, v: f64, w: f64, h: f64) -> (f64, f64) {
    let f = |r: f64| nu * nu / (r * r) + q * r * r + c;
    let acc = |r: f64, v: f64, w: f64| (w, -w / r + f(r) * v);

    let (k1v, k1w) = acc(r, v, w);
    let (k2v, k2w) = acc(r + h / 2.0, v + h / 2.0 * k1v, w + h / 2.0 * k1w);
    let (k3v, k3w) = acc(r + h / 2.0, v + h / 2.0 * k2v, w + h / 2.0 * k2w);
    let (k4v, k4w) = acc(r + h, v + h * k3v, w + h * k3w);
    (
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        w + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w),
    )
}

/// Flux-line Green function from Bessel series: order `nu_m = |m - charge
/// * eta|`, radial factor `2 I_nu(kappa r_<) K_nu(kappa r_>)` per channel.
pub fn flux_line_green_oracle(
    charge: f64,
    eta: f64,
    r: Point,
    s: Point,
    e: f64,
) -> Complex64 {
    assert!(e < 0.0, "flux-line oracle needs an energy below the spectrum");
    let kappa = (-2.0 * e).sqrt();
    let (rho_r, rho_s) = (r.norm(), s.norm());
    let (r_lt, r_gt) = if rho_r <= rho_s {
        (rho_r, rho_s)
    } else {
        (rho_s, rho_r)
    };
    assert!(r_lt > 0.0, "flux-line oracle needs both points off the origin");
    let dphi = r.angle() - s.angle();

    let channel = |m: i64| -> f64 {
        let nu = ((m as f64) - charge * eta).abs();
        2.0 * bessel_i_series(nu, kappa * r_lt) * bessel_k_reflection(nu, kappa * r_gt)
    };

    let mut acc = Complex64::new(channel(0) / TAU, 0.0);
    let mut scale = acc.norm();
    let mut quiet = 0;
    for m in 1..=CHANNEL_CAP {
        let swing = (m as f64) * dphi;
        let inc = (Complex64::from_polar(1.0, swing) * channel(m)
            + Complex64::from_polar(1.0, -swing) * channel(-m))
            / TAU;
        acc += inc;
        scale = scale.max(inc.norm());
        if inc.norm() < 1.0e-17 * scale {
            quiet += 1;
            if quiet >= QUIET_PAIRS {
                return acc;
            }
        } else {
            quiet = 0;
        }
    }
    panic!("flux-line oracle window exhausted before the sum settled");
}

/// Reciprocal gamma for any real argument, via reflection on the left
/// half-line where `ln_gamma` itself does not apply.
fn recip_gamma(z: f64) -> f64 {
    if z > 0.0 {
        (-ln_gamma(z).expect("positive gamma argument")).exp()
    } else {
        (PI * z).sin() * ln_gamma(1.0 - z).expect("positive gamma argument").exp() / PI
    }
}

/// Ascending series for the modified Bessel function `I_nu(x)`, valid for
/// any real order (negative orders route gamma through reflection).
pub fn bessel_i_series(nu: f64, x: f64) -> f64 {
    assert!(x > 0.0, "series argument must be positive");
    let half_log = (x / 2.0).ln();
    let mut sum = 0.0;
    let mut peak: f64 = 0.0;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        let log_kfact = ln_gamma(kf + 1.0).expect("positive gamma argument");
        let magnitude = ((nu + 2.0 * kf) * half_log - log_kfact).exp();
        let term = magnitude * recip_gamma(nu + kf + 1.0);
        sum += term;
        peak = peak.max(term.abs());
        if kf > nu.abs() / 2.0 + 2.0 && term.abs() < 1.0e-18 * peak {
            break;
        }
        k += 1;
        assert!(k < 400, "modified Bessel series failed to converge");
    }
    assert!(
        peak < 1.0e6 * sum.abs().max(1.0e-280),
        "modified Bessel series lost too many digits to cancellation"
    );
    sum
}

/// `K_nu(x)` by reflection, `pi (I_{-nu} - I_nu) / (2 sin(pi nu))`.
/// Valid only away from integer orders; the subtraction costs about
/// `e^{-2x}` in relative precision, so callers keep `x` moderate.
pub fn bessel_k_reflection(nu: f64, x: f64) -> f64 {
    let swing = (PI * nu).sin();
    assert!(
        swing.abs() > 0.05,
        "reflection formula degenerates near integer order {nu}"
    );
    PI * (bessel_i_series(-nu, x) - bessel_i_series(nu, x)) / (2.0 * swing)
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(xs.len() == ys.len() && xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>();
    let var = xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    cov / var
}

/// Relative distance between two complex values, scaled by the reference.
pub fn relative_gap(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm()
}
