//! Point levels of a perturbed background.
//!
//! Attaching a point interaction of strength `alpha` at `site` turns the
//! resolvent into
//! `G_alpha = G - [Q(E; site) + alpha]^{-1} G(., site) G(site, .)`,
//! so a bound state sits at each energy in a spectral gap where
//! `Q(E_0; site) + alpha = 0`. Inside a gap `Q` is increasing in `E`, so a
//! gap holds at most one level, and the (unnormalized) eigenfunction is the
//! kernel column `G(., site; E_0)` with squared norm `dQ/dE(E_0)`.
//!
//! The solver brackets the root by sampling geometrically from the gap
//! midpoint toward both edges (or, in a bottom gap, by receding from the
//! upper edge in doubling steps), then polishes with Brent's method.

use crate::backgrounds::Background;
use crate::error::{Error, Result};
use crate::model::{Gap, Point};
use crate::numerics::roots::brent;
use crate::numerics::Tolerance;
use num_complex::Complex64;

/// Closest fractional approach to a gap edge while bracketing.
const EDGE_GUARD: f64 = 1e-9;

/// Hard floor for the downward march in a bottom gap.
const ENERGY_FLOOR: f64 = -1e6;

/// A solved point level: energy, site, and the norm data needed to evaluate
/// the normalized eigenfunction.
pub struct BoundState<'a> {
    background: &'a dyn Background,
    site: Point,
    energy: f64,
    q_slope: f64,
}

impl std::fmt::Debug for BoundState<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundState")
            .field("background", &self.background.name())
            .field("site", &self.site)
            .field("energy", &self.energy)
            .field("q_slope", &self.q_slope)
            .finish()
    }
}

impl<'a> BoundState<'a> {
    /// Level energy `E_0`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Perturbation site.
    pub fn site(&self) -> Point {
        self.site
    }

    /// `dQ/dE` at the level: the squared norm of the kernel column.
    pub fn q_slope(&self) -> f64 {
        self.q_slope
    }

    /// Normalization factor `(dQ/dE)^{-1/2}`.
    pub fn norm_factor(&self) -> f64 {
        1.0 / self.q_slope.sqrt()
    }

    /// The background this level lives on.
    pub fn background(&self) -> &'a dyn Background {
        self.background
    }

    /// Normalized eigenfunction at `r`.
    pub fn eval(&self, r: Point) -> Result<Complex64> {
        Ok(self.background.green(r, self.site, self.energy)? * self.norm_factor())
    }

    /// Radius beyond which the eigenfunction is negligible.
    pub fn decay_radius(&self) -> f64 {
        self.background.decay_radius(self.energy)
    }
}

/// Result of a solve in one gap.
pub enum SolveOutcome<'a> {
    /// The gap holds a level.
    Solved(BoundState<'a>),
    /// `Q + alpha` has fixed sign across the gap: no level (possible only
    /// in gaps where `Q` stays bounded at an edge).
    NoSolution,
}

/// Find the zero of `f` inside `gap`, or report that `f` has fixed sign.
///
/// `f` must be continuous and is expected (not required) to be increasing;
/// the returned root is the first sign change met walking from the midpoint
/// toward the upper edge, then toward the lower one.
pub fn find_root_in_gap<F>(mut f: F, gap: Gap, tol: &Tolerance) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut prev_e;
    let mut prev_v;
    if gap.is_bottom() {
        // Recede from the upper edge in doubling steps down to the floor.
        prev_e = gap.upper - EDGE_GUARD;
        prev_v = f(prev_e)?;
        if prev_v == 0.0 {
            return Ok(Some(prev_e));
        }
        for k in -29i32..=60 {
            let step = 2.0_f64.powi(k);
            let e = (gap.upper - step).max(ENERGY_FLOOR);
            if e < prev_e {
                let v = f(e)?;
                if v == 0.0 {
                    return Ok(Some(e));
                }
                if v.signum() != prev_v.signum() {
                    return Ok(Some(brent(&mut f, e, prev_e, tol)?.root));
                }
                prev_e = e;
                prev_v = v;
            }
            if e <= ENERGY_FLOOR {
                break;
            }
        }
        return Ok(None);
    }
    // Finite gap: march from the midpoint toward each edge in turn, halving
    // the remaining distance, stopping at the guard band.
    let width = gap.width();
    let guard = EDGE_GUARD * width;
    let mid = 0.5 * (gap.lower + gap.upper);
    let mid_v = f(mid)?;
    if mid_v == 0.0 {
        return Ok(Some(mid));
    }
    for (edge, inward) in [(gap.upper, -1.0), (gap.lower, 1.0)] {
        prev_e = mid;
        prev_v = mid_v;
        for k in 2i32..=60 {
            let offset = (width * 2.0_f64.powi(-k)).max(guard);
            let e = edge + inward * offset;
            let at_guard = offset <= guard;
            // Only evaluate while still advancing away from the midpoint.
            if (e - prev_e) * inward < 0.0 {
                let v = f(e)?;
                if v == 0.0 {
                    return Ok(Some(e));
                }
                if v.signum() != prev_v.signum() {
                    let (a, b) = if e < prev_e { (e, prev_e) } else { (prev_e, e) };
                    return Ok(Some(brent(&mut f, a, b, tol)?.root));
                }
                prev_e = e;
                prev_v = v;
            }
            if at_guard {
                break;
            }
        }
    }
    Ok(None)
}

/// Solve `Q(E; site) + alpha = 0` in the `gap_index`-th gap.
pub fn solve_level<'a>(
    background: &'a dyn Background,
    alpha: f64,
    site: Point,
    gap_index: usize,
    tol: &Tolerance,
) -> Result<SolveOutcome<'a>> {
    if !alpha.is_finite() {
        return Err(Error::domain(
            "solve",
            format!("coupling must be finite, got {alpha}"),
        ));
    }
    let gap = background.gap(gap_index)?;
    let root = find_root_in_gap(
        |e| Ok(background.q_function(e, site)? + alpha),
        gap,
        tol,
    )?;
    match root {
        None => Ok(SolveOutcome::NoSolution),
        Some(energy) => {
            let q_slope = background.q_derivative(energy, site)?;
            if !(q_slope > 0.0) {
                return Err(Error::domain(
                    "solve",
                    format!("nonpositive dQ/dE = {q_slope} at the solved level {energy}"),
                ));
            }
            Ok(SolveOutcome::Solved(BoundState {
                background,
                site,
                energy,
                q_slope,
            }))
        }
    }
}

/// Like [`solve_level`], but a missing level is an error.
pub fn solve_level_required<'a>(
    background: &'a dyn Background,
    alpha: f64,
    site: Point,
    gap_index: usize,
    tol: &Tolerance,
) -> Result<BoundState<'a>> {
    match solve_level(background, alpha, site, gap_index, tol)? {
        SolveOutcome::Solved(state) => Ok(state),
        SolveOutcome::NoSolution => Err(Error::NoSolutionInGap { gap_index, alpha }),
    }
}
