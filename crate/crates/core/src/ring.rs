//! One-dimensional ring threaded by a flux line, with a movable point
//! perturbation on the ring.
//!
//! A carrier on a circle of radius `R` with `eta` flux quanta through the
//! circle has kinetic term `(1/2R^2)(-i d/dphi + eta)^2` and free levels
//! `eps_m = (m + eta)^2 / (2 R^2)`, `m` integer. A point perturbation of
//! strength `alpha` at angle `theta` binds one level per spectral gap,
//! fixed by `Q(E0) + alpha = 0` with the regularized diagonal resolvent
//!
//! `Q(E) = (R/pi) sum_m 1 / ((m + eta)^2 - 2 R^2 E)`.
//!
//! Dragging the site once around the ring is the sharpest test bed for the
//! geometric phase of the bound state: the phase is `2 pi V` with
//! `V = <m>`, the mean canonical angular momentum of the level, and `V` is
//! reachable by three independent routes that this module exposes
//! separately so they can be cross-checked:
//!
//! - the spectral-weight ratio `sum_m m D_m^-2 / sum_m D_m^-2`,
//! - the flux derivative `R^2 dE0/deta - eta`, re-solving the level at
//!   shifted flux,
//! - the discrete holonomy of real-space overlaps of the normalized bound
//!   state at sites stepped around the ring.
//!
//! All channel sums run over an explicit window centered on the smallest
//! `|m + eta|` and close with Euler-Maclaurin tails of the geometric
//! expansion in `2 R^2 E / (m + eta)^2`, so each sum costs a few hundred
//! terms at machine accuracy. The closed trigonometric form of `Q` and its
//! flux derivative (simple poles summed over the free spectrum) are kept
//! alongside as independent identities.

use crate::error::{Error, Result};
use crate::krein::find_root_in_gap;
use crate::model::Gap;
use crate::numerics::Tolerance;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Window margin (in channel counts) beyond the geometric-convergence
/// radius of the tail expansion; keeps the tail ratio below `1/9`.
const WINDOW_MARGIN: i64 = 64;

/// Truncation target for the tail expansion, relative to the summed value.
const TAIL_EPS: f64 = 1e-18;

/// Tail expansion terms allowed before reporting non-convergence; the
/// geometric ratio is below `1/9`, so a converging run needs ~20.
const TAIL_TERMS_MAX: usize = 60;

/// Grid for the real-space overlap trapezoid; halved once for the
/// Richardson step, so chain sizes must divide the halved grid.
const OVERLAP_GRID: usize = 8192;

/// Discrete chain length for the holonomy route (doubled once for the
/// Richardson step).
const CHAIN_POINTS: usize = 256;

/// Step for the flux-derivative route; wide enough that level-solve noise
/// stays far below the quotient, small enough that the gap edges (which
/// move with the flux) stay clear.
const FLUX_STEP: f64 = 1e-4;

/// A ring background: radius and flux through the ring, in quanta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ring {
    radius: f64,
    eta: f64,
}

/// A bound level of the perturbed ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingLevel {
    energy: f64,
    q_slope: f64,
}

impl RingLevel {
    /// The level energy.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// `dQ/dE` at the level; always positive in a gap.
    pub fn q_slope(&self) -> f64 {
        self.q_slope
    }
}

/// The three windowed channel sums every ring quantity is built from:
/// `s1 = sum 1/D_m`, `s2 = sum D_m^-2`, `sm = sum (m + eta) D_m^-2`.
struct ChannelSums {
    s1: f64,
    s2: f64,
    sm: f64,
}

impl Ring {
    /// A ring of the given radius with `eta` flux quanta through it.
    pub fn new(radius: f64, eta: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(
                "ring",
                format!("radius must be positive and finite, got {radius}"),
            ));
        }
        if !eta.is_finite() {
            return Err(Error::domain(
                "ring",
                format!("flux must be finite, got {eta}"),
            ));
        }
        Ok(Ring { radius, eta })
    }

    /// Ring radius.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Flux through the ring, in quanta.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `2 R^2 E`, the natural spectral variable.
    fn zeta(&self, e: f64) -> f64 {
        2.0 * self.radius * self.radius * e
    }

    /// Free level of the channel `m`.
    pub fn level(&self, m: i64) -> f64 {
        let nu = m as f64 + self.eta;
        nu * nu / (2.0 * self.radius * self.radius)
    }

    /// The `k`-th spectral gap: `k = 0` is `(-inf, eps_min)`, `k >= 1`
    /// lies between consecutive distinct free levels. Degenerate levels
    /// (integer and half-integer flux) collapse into one edge.
    pub fn gap(&self, k: usize) -> Result<Gap> {
        let reach = k as i64 + 2 + self.eta.abs().ceil() as i64;
        let mut values: Vec<f64> = (-reach..=reach).map(|m| self.level(m)).collect();
        values.sort_by(|a, b| a.total_cmp(b));
        values.dedup();
        if k == 0 {
            return Gap::new(f64::NEG_INFINITY, values[0]);
        }
        Gap::new(values[k - 1], values[k])
    }

    /// The channel window and its Euler-Maclaurin tails at energy `e`.
    fn channel_sums(&self, e: f64) -> Result<ChannelSums> {
        let zeta = self.zeta(e);
        let center = (-self.eta).round() as i64;
        let span = (3.0 * (self.eta.abs() + 1.0 + zeta.abs().sqrt())).ceil() as i64
            + WINDOW_MARGIN;
        let mut s = ChannelSums {
            s1: 0.0,
            s2: 0.0,
            sm: 0.0,
        };
        for m in (center - span)..=(center + span) {
            let nu = m as f64 + self.eta;
            let d = nu * nu - zeta;
            let inv = 1.0 / d;
            if !inv.is_finite() {
                return Err(Error::domain(
                    "ring spectral function",
                    format!("energy {e:.6e} coincides with the free level of channel {m}"),
                ));
            }
            s.s1 += inv;
            s.s2 += inv * inv;
            s.sm += nu * inv * inv;
        }
        // Tails over |m| > span: geometric expansion of 1/D in
        // zeta/(m+eta)^2, each power summed as a Hurwitz tail. The window
        // width keeps the expansion ratio below 1/9.
        let a_pos = (center + span + 1) as f64 + self.eta;
        let a_neg = -((center - span - 1) as f64 + self.eta);
        let mut power = 1.0;
        for j in 0..TAIL_TERMS_MAX {
            let jp = (j + 1) as f64;
            let even = power * (hurwitz_tail(a_pos, 2 * j as u32 + 2)
                + hurwitz_tail(a_neg, 2 * j as u32 + 2));
            let quad = jp
                * power
                * (hurwitz_tail(a_pos, 2 * j as u32 + 4)
                    + hurwitz_tail(a_neg, 2 * j as u32 + 4));
            let odd = jp
                * power
                * (hurwitz_tail(a_pos, 2 * j as u32 + 3)
                    - hurwitz_tail(a_neg, 2 * j as u32 + 3));
            s.s1 += even;
            s.s2 += quad;
            s.sm += odd;
            let scale = 1.0 + s.s1.abs() + s.s2.abs() + s.sm.abs();
            if even.abs().max(quad.abs()).max(odd.abs()) < TAIL_EPS * scale {
                return Ok(s);
            }
            power *= zeta;
        }
        Err(Error::SeriesTail {
            bound: power.abs(),
            tol: TAIL_EPS,
            terms: TAIL_TERMS_MAX,
        })
    }

    /// The regularized diagonal resolvent `Q(E)`.
    pub fn q_function(&self, e: f64) -> Result<f64> {
        Ok(self.radius / PI * self.channel_sums(e)?.s1)
    }

    /// `dQ/dE`.
    pub fn q_derivative(&self, e: f64) -> Result<f64> {
        let r = self.radius;
        Ok(2.0 * r * r * r / PI * self.channel_sums(e)?.s2)
    }

    /// `dQ/deta` at fixed energy.
    pub fn q_eta_slope(&self, e: f64) -> Result<f64> {
        Ok(-2.0 * self.radius / PI * self.channel_sums(e)?.sm)
    }

    /// Closed form of `Q`: the channel sum collapses to
    /// `(R/z) sin(2 pi z) / (cos 2 pi z - cos 2 pi eta)` with
    /// `z = R sqrt(2E)` (hyperbolic below the spectrum).
    pub fn q_closed_form(&self, e: f64) -> Result<f64> {
        let (ratio, denom) = self.closed_form_parts(e)?;
        Ok(self.radius * ratio / denom)
    }

    /// Closed form of `dQ/deta`, from the same collapse.
    pub fn q_closed_form_eta_slope(&self, e: f64) -> Result<f64> {
        let (ratio, denom) = self.closed_form_parts(e)?;
        let eta_term = TAU * (TAU * self.eta).sin();
        Ok(-self.radius * ratio * eta_term / (denom * denom))
    }

    /// `(sin(2 pi z)/z, cos(2 pi z) - cos(2 pi eta))` continued through
    /// `E <= 0`, where `z` is imaginary and both pieces turn hyperbolic.
    fn closed_form_parts(&self, e: f64) -> Result<(f64, f64)> {
        let zeta = self.zeta(e);
        let cos_eta = (TAU * self.eta).cos();
        let (ratio, cos_z) = if zeta > 0.0 {
            let z = zeta.sqrt();
            ((TAU * z).sin() / z, (TAU * z).cos())
        } else if zeta < 0.0 {
            let y = (-zeta).sqrt();
            // sin(2 pi i y)/(i y) = sinh(2 pi y)/y, cos(2 pi i y) = cosh.
            ((TAU * y).sinh() / y, (TAU * y).cosh())
        } else {
            (TAU, 1.0)
        };
        let denom = cos_z - cos_eta;
        if denom == 0.0 || !ratio.is_finite() {
            return Err(Error::domain(
                "ring spectral function",
                format!("closed form is singular at E = {e:.6e}"),
            ));
        }
        Ok((ratio, denom))
    }

    /// The bound level of coupling `alpha` in the `gap_index`-th gap.
    pub fn solve_level(&self, alpha: f64, gap_index: usize, tol: &Tolerance) -> Result<RingLevel> {
        if !alpha.is_finite() {
            return Err(Error::domain(
                "ring solve",
                format!("coupling must be finite, got {alpha}"),
            ));
        }
        let gap = self.gap(gap_index)?;
        let root = find_root_in_gap(|e| Ok(self.q_function(e)? + alpha), gap, tol)?;
        match root {
            None => Err(Error::NoSolutionInGap { gap_index, alpha }),
            Some(energy) => {
                let q_slope = self.q_derivative(energy)?;
                if !(q_slope > 0.0) {
                    return Err(Error::domain(
                        "ring solve",
                        format!("nonpositive dQ/dE = {q_slope} at the solved level {energy}"),
                    ));
                }
                Ok(RingLevel { energy, q_slope })
            }
        }
    }

    /// Mean canonical angular momentum `<m>` of the bound state at energy
    /// `e`: the spectral-weight ratio over the channels.
    pub fn momentum_mean(&self, e: f64) -> Result<f64> {
        let s = self.channel_sums(e)?;
        Ok(s.sm / s.s2 - self.eta)
    }

    /// `V` by the spectral-weight ratio at the solved level.
    pub fn connection_by_ratio(
        &self,
        alpha: f64,
        gap_index: usize,
        tol: &Tolerance,
    ) -> Result<f64> {
        let level = self.solve_level(alpha, gap_index, tol)?;
        self.momentum_mean(level.energy)
    }

    /// `V = R^2 dE0/deta - eta`, with the flux derivative taken by
    /// symmetric differences (one Richardson step) of re-solved levels.
    pub fn connection_by_flux_derivative(
        &self,
        alpha: f64,
        gap_index: usize,
        tol: &Tolerance,
    ) -> Result<f64> {
        let h = FLUX_STEP;
        // The quotient amplifies the level error by 1/h.
        let stol = tol.scaled(1e-2);
        let energy_at = |eta: f64| -> Result<f64> {
            let shifted = Ring::new(self.radius, eta)?;
            Ok(shifted.solve_level(alpha, gap_index, &stol)?.energy)
        };
        let d_wide = (energy_at(self.eta + h)? - energy_at(self.eta - h)?) / (2.0 * h);
        let d_half = (energy_at(self.eta + 0.5 * h)? - energy_at(self.eta - 0.5 * h)?) / h;
        let slope = (4.0 * d_half - d_wide) / 3.0;
        Ok(self.radius * self.radius * slope - self.eta)
    }

    /// `V` from the discrete holonomy of the site loop: the normalized
    /// bound state is evaluated in real space, overlaps of neighboring
    /// sites are integrated on a trapezoid grid, and the chain phase
    /// `-sum_k arg <psi_k|psi_{k+1}>` is extrapolated in the chain step.
    /// Rotation covariance makes every link equal, so one overlap per
    /// chain size suffices.
    pub fn connection_by_holonomy(
        &self,
        alpha: f64,
        gap_index: usize,
        tol: &Tolerance,
    ) -> Result<f64> {
        let level = self.solve_level(alpha, gap_index, tol)?;
        let wave = self.eigenfunction(&level)?;
        let v_at = |n: usize| -> Result<f64> {
            let o = wave.neighbor_overlap(TAU / n as f64)?;
            if o.norm() < 0.5 {
                return Err(Error::domain(
                    "ring holonomy",
                    format!("neighbor overlap {:.3e} too small to track the phase", o.norm()),
                ));
            }
            Ok(-(n as f64) * o.arg() / TAU)
        };
        let coarse = v_at(CHAIN_POINTS)?;
        let fine = v_at(2 * CHAIN_POINTS)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }

    /// The normalized bound state as a function of the angle from the
    /// site, ready for pointwise evaluation.
    pub fn eigenfunction(&self, level: &RingLevel) -> Result<RingWave> {
        let zeta = self.zeta(level.energy);
        // Reduce the flux to [-1/2, 1/2]; the shift is restored as an
        // explicit winding phase, which the closed-form base requires.
        let winding = self.eta.round();
        let eta = self.eta - winding;
        // Kummer remainder coefficients fall like m^-4; the window is
        // sized so the discarded tail stays below the grid error.
        let span = ((0.75 * zeta.abs().max(1e-30) / 1e-12).cbrt().ceil() as usize)
            .max(WINDOW_MARGIN as usize);
        let mut coeffs = Vec::with_capacity(span);
        for m in 1..=span {
            let nu_pos = m as f64 + eta;
            let nu_neg = -(m as f64) + eta;
            let d_pos = nu_pos * nu_pos - zeta;
            let d_neg = nu_neg * nu_neg - zeta;
            if d_pos == 0.0 || d_neg == 0.0 {
                return Err(Error::domain(
                    "ring state",
                    format!("energy {:.6e} coincides with a free level", level.energy),
                ));
            }
            coeffs.push((
                1.0 / (nu_pos * nu_pos * d_pos),
                1.0 / (nu_neg * nu_neg * d_neg),
            ));
        }
        let d0 = eta * eta - zeta;
        let s2 = self.channel_sums(level.energy)?.s2;
        Ok(RingWave {
            radius: self.radius,
            eta,
            winding,
            zeta,
            inv_d0: 1.0 / d0,
            coeffs,
            // |psi|^2 integrates to 1 against R dphi.
            norm: 1.0 / (TAU * self.radius * s2).sqrt(),
        })
    }
}

/// A normalized bound state of the perturbed ring, evaluated pointwise
/// through the closed-form base of its channel expansion.
pub struct RingWave {
    radius: f64,
    /// Flux reduced to `[-1/2, 1/2]`.
    eta: f64,
    /// Integer flux carried as the explicit winding `exp(-i w chi)`.
    winding: f64,
    zeta: f64,
    inv_d0: f64,
    /// `1 / ((m+eta)^2 D_m)` for `m = 1..` (positive, negative channel).
    coeffs: Vec<(f64, f64)>,
    norm: f64,
}

impl RingWave {
    /// The state at angle `chi` from its site, `chi` in `[0, 2 pi)`.
    pub fn eval(&self, chi: f64) -> Complex64 {
        let base = kummer_base(chi, self.eta) + Complex64::from(self.inv_d0);
        let rot = Complex64::from_polar(1.0, chi);
        let mut phase = Complex64::new(1.0, 0.0);
        let mut remainder = Complex64::new(0.0, 0.0);
        for (pos, neg) in &self.coeffs {
            phase *= rot;
            remainder += phase * *pos + phase.conj() * *neg;
        }
        let sum = base + self.zeta * remainder;
        let shift = Complex64::from_polar(1.0, -self.winding * chi);
        self.norm * shift * sum
    }

    /// Overlap `<psi_theta|psi_{theta+delta}>` of neighboring sites,
    /// by a periodic trapezoid with one Richardson step. The integrand
    /// has derivative kinks at both sites, so `delta` must sit on the
    /// halved grid for the quadratic error term to cancel cleanly.
    pub fn neighbor_overlap(&self, delta: f64) -> Result<Complex64> {
        let steps = (TAU / delta).round() as usize;
        if (OVERLAP_GRID / 2) % steps != 0 {
            return Err(Error::domain(
                "ring holonomy",
                format!("chain of {steps} links does not divide the overlap grid"),
            ));
        }
        let coarse = self.overlap_trapezoid(delta, OVERLAP_GRID / 2);
        let fine = self.overlap_trapezoid(delta, OVERLAP_GRID);
        Ok((4.0 * fine - coarse) / 3.0)
    }

    fn overlap_trapezoid(&self, delta: f64, grid: usize) -> Complex64 {
        let h = TAU / grid as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..grid {
            let chi = j as f64 * h;
            let ahead = if chi >= delta { chi - delta } else { chi - delta + TAU };
            acc += self.eval(chi).conj() * self.eval(ahead);
        }
        acc * h * self.radius
    }
}

/// `sum_{m != 0} e^{i m chi} / (m + eta)^2` for `chi` in `[0, 2 pi)` and
/// `|eta| <= 1/2`: the closed form of the full sum minus its `m = 0` term,
/// degenerating to the Bernoulli polynomial at zero flux.
fn kummer_base(chi: f64, eta: f64) -> Complex64 {
    if eta == 0.0 {
        return Complex64::from(PI * PI / 3.0 - PI * chi + 0.5 * chi * chi);
    }
    let s = (PI * eta).sin();
    let c = (PI * eta).cos();
    let arc = PI - chi;
    let phase = Complex64::from_polar(1.0, eta * arc);
    let bracket = Complex64::new(PI * c / s, -arc);
    PI * phase * bracket / s - Complex64::from(1.0 / (eta * eta))
}

/// Tail `sum_{j >= 0} (a + j)^{-k}` for `a >> 1`, by Euler-Maclaurin with
/// three Bernoulli corrections; exact to below 1e-17 absolute for
/// `a >= 60`, `k >= 2`.
fn hurwitz_tail(a: f64, k: u32) -> f64 {
    let kf = k as f64;
    let inv = 1.0 / a;
    let p = a.powi(-(k as i32));
    let head = p * a / (kf - 1.0);
    let c1 = kf / 12.0 * p * inv;
    let c2 = kf * (kf + 1.0) * (kf + 2.0) / 720.0 * p * inv * inv * inv;
    let c3 = kf * (kf + 1.0) * (kf + 2.0) * (kf + 3.0) * (kf + 4.0) / 30240.0
        * p
        * inv.powi(5);
    head + 0.5 * p + c1 - c2 + c3
}
