//! Geometric connection of the bound state under transport of its site.
//!
//! When the perturbation site is dragged around a closed loop, the bound
//! state returns to itself up to a phase with a geometric part. This module
//! computes the connection's azimuthal component through two independent
//! routes — from the state's angular momentum about the origin, and from
//! the flux-density derivative of the level combined with moment integrals
//! of the state — probes the radial component (which vanishes identically
//! for rotation-invariant backgrounds), and accumulates loop phases both as
//! a line integral of the connection and as the phase of a discrete chain
//! of overlaps, which serves as the model-independent oracle.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::backgrounds::Background;
use crate::error::{Error, Result};
use crate::krein::{solve_level_required, BoundState};
use crate::model::{LoopSpec, Point};
use crate::numerics::Tolerance;
use crate::quad2d::{integrate_patch, state_overlap, PlanePatch};

/// Overlap moduli below this are treated as numerically orthogonal
/// neighbors: the segment phase is no longer trustworthy.
const OVERLAP_FLOOR: f64 = 1e-6;
/// Refinement targets for the discrete transport chain: segment phases
/// and moduli beyond these bounds trigger loop subdivision.
const SEGMENT_PHASE_BOUND: f64 = 1.0;
const SEGMENT_MODULUS_BOUND: f64 = 0.5;
/// Hard cap on loop subdivision.
const MAX_REFINEMENT: usize = 64;

/// How the azimuthal connection component is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionRoute {
    /// From the bound state's angular momentum about the origin divided by
    /// the site radius. Available where the background supplies a closed
    /// form for the momentum.
    AngularMomentum,
    /// From the flux-density derivative of the level (finite differences
    /// over rebuilt backgrounds) combined with the second moment of the
    /// state and the singular-flux term. Available where the background
    /// can be rebuilt at a shifted flux density.
    FluxDerivative,
}

/// The azimuthal connection component `V_theta` at `site`, for the level
/// with coupling `alpha` in the `gap_index`-th gap.
pub fn azimuthal_connection(
    background: &dyn Background,
    alpha: f64,
    site: Point,
    gap_index: usize,
    route: ConnectionRoute,
    tol: &Tolerance,
) -> Result<f64> {
    let rho = site.norm();
    if rho == 0.0 {
        return Err(Error::domain(
            "connection",
            "the azimuthal connection is undefined at the origin".to_string(),
        ));
    }
    match route {
        ConnectionRoute::AngularMomentum => {
            let state = solve_level_required(background, alpha, site, gap_index, tol)?;
            Ok(background.angular_momentum(state.energy(), site)? / rho)
        }
        ConnectionRoute::FluxDerivative => {
            let slope = rebuilt_slope(background, alpha, site, gap_index, tol)?;
            let state = solve_level_required(background, alpha, site, gap_index, tol)?;
            let r2 = second_moment(&state, tol)?;
            let xi0 = background.xi0();
            let sign = background.charge_sign().sign();
            Ok((-slope / PI + PI * xi0 * r2 + sign * background.eta()) / rho)
        }
    }
}

/// `dE0/dxi0` by symmetric finite differences with one extrapolation step,
/// re-solving the level on backgrounds rebuilt at shifted flux density.
/// Fails with `NotAvailable` on backgrounds that cannot be rebuilt.
fn rebuilt_slope(
    background: &dyn Background,
    alpha: f64,
    site: Point,
    gap_index: usize,
    tol: &Tolerance,
) -> Result<f64> {
    let xi0 = background.xi0();
    let h = (1e-4 * xi0.abs()).max(1e-6);
    // The difference quotient amplifies level errors by 1/h, so the level
    // solves run well below the caller's tolerance.
    let stol = tol.scaled(1e-3);
    let energy_at = |xi: f64| -> Result<f64> {
        let shifted = background.rebuilt_at_xi0(xi)?;
        Ok(solve_level_required(shifted.as_ref(), alpha, site, gap_index, &stol)?.energy())
    };
    let d_wide = (energy_at(xi0 + h)? - energy_at(xi0 - h)?) / (2.0 * h);
    let d_half = (energy_at(xi0 + 0.5 * h)? - energy_at(xi0 - 0.5 * h)?) / h;
    Ok((4.0 * d_half - d_wide) / 3.0)
}

/// `dE0/dxi0`, preferring the rebuilt finite difference. Backgrounds that
/// cannot be rebuilt (the pure flux line, which has no smooth-field density)
/// fall back to the zero-field identity
/// `dE0/dxi0 = -pi <l> + pi sigma_e eta`.
pub fn flux_density_slope(
    background: &dyn Background,
    alpha: f64,
    site: Point,
    gap_index: usize,
    tol: &Tolerance,
) -> Result<f64> {
    match rebuilt_slope(background, alpha, site, gap_index, tol) {
        Err(Error::NotAvailable { .. }) => {
            let state = solve_level_required(background, alpha, site, gap_index, tol)?;
            let momentum = background.angular_momentum(state.energy(), site)?;
            let sign = background.charge_sign().sign();
            Ok(PI * (sign * background.eta() - momentum))
        }
        other => other,
    }
}

/// `<r^2>` of the normalized bound state, measured from the origin.
fn second_moment(state: &BoundState<'_>, tol: &Tolerance) -> Result<f64> {
    let reach = state.decay_radius();
    let patch = PlanePatch::covering(state.site(), state.site(), reach, reach)?;
    let f = |r: Point| -> Result<Complex64> {
        let a = state.eval(r)?;
        Ok(Complex64::new(r.dot(r) * a.norm_sqr(), 0.0))
    };
    Ok(integrate_patch(&f, &patch, tol)?.value.re)
}

/// The radial connection component probed by symmetric displacement of the
/// site along its own ray: `-Im(<psi_s|psi_{s+h}> - <psi_s|psi_{s-h}>)/2h`.
/// For rotation-invariant backgrounds this vanishes identically; the probe
/// measures how well the numerics reproduce that.
pub fn radial_connection_probe(
    background: &dyn Background,
    alpha: f64,
    site: Point,
    gap_index: usize,
    h: f64,
    tol: &Tolerance,
) -> Result<f64> {
    let rho = site.norm();
    if !(h > 0.0 && h < rho) {
        return Err(Error::domain(
            "connection",
            format!("radial step {h:.3e} must lie in (0, {rho:.3e})"),
        ));
    }
    let dir = site * (1.0 / rho);
    let center = solve_level_required(background, alpha, site, gap_index, tol)?;
    let outward = solve_level_required(background, alpha, site + dir * h, gap_index, tol)?;
    let inward = solve_level_required(background, alpha, site - dir * h, gap_index, tol)?;
    let o_out = state_overlap(&center, &outward, tol)?.value;
    let o_in = state_overlap(&center, &inward, tol)?.value;
    Ok(-(o_out - o_in).im / (2.0 * h))
}

/// Sites of the loop at `factor`-fold refinement. Circles refine along the
/// arc; polygons subdivide each edge, keeping the same geometric path.
fn loop_sites(spec: &LoopSpec, factor: usize) -> Result<Vec<Point>> {
    match spec {
        LoopSpec::Circle { .. } => spec.refined(factor).discretize(),
        LoopSpec::Polygon { .. } => {
            let base = spec.discretize()?;
            if factor == 1 {
                return Ok(base);
            }
            let n = base.len();
            let mut out = Vec::with_capacity(n * factor);
            for k in 0..n {
                let a = base[k];
                let b = base[(k + 1) % n];
                for j in 0..factor {
                    out.push(a + (b - a) * (j as f64 / factor as f64));
                }
            }
            Ok(out)
        }
    }
}

/// The loop integral of the azimuthal connection, `∮ V_theta rho dtheta`,
/// by the midpoint rule over the loop segments with one extrapolation step.
pub fn connection_phase(
    background: &dyn Background,
    alpha: f64,
    spec: &LoopSpec,
    gap_index: usize,
    route: ConnectionRoute,
    tol: &Tolerance,
) -> Result<f64> {
    let coarse = connection_line_integral(
        background,
        alpha,
        &loop_sites(spec, 1)?,
        gap_index,
        route,
        tol,
    )?;
    let fine = connection_line_integral(
        background,
        alpha,
        &loop_sites(spec, 2)?,
        gap_index,
        route,
        tol,
    )?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn connection_line_integral(
    background: &dyn Background,
    alpha: f64,
    sites: &[Point],
    gap_index: usize,
    route: ConnectionRoute,
    tol: &Tolerance,
) -> Result<f64> {
    let n = sites.len();
    let terms: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let a = sites[k];
            let b = sites[(k + 1) % n];
            let mid = (a + b) * 0.5;
            if mid.norm() == 0.0 {
                return Err(Error::LoopThroughOrigin);
            }
            let v = azimuthal_connection(background, alpha, mid, gap_index, route, tol)?;
            // Angle swept about the origin by this segment.
            let dtheta = a.wedge(b).atan2(a.dot(b));
            Ok(v * mid.norm() * dtheta)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(terms.iter().sum())
}

/// Phase and diagnostics of a discrete transport chain around a loop.
#[derive(Debug, Clone, Copy)]
pub struct HolonomyOutcome {
    /// Phase of the overlap chain at the finest refinement used.
    pub phase: f64,
    /// Extrapolation of the two finest refinements; the headline value.
    pub refined_phase: f64,
    /// Sites in the finest chain.
    pub segments: usize,
    /// Largest single-segment phase in the finest chain.
    pub max_segment_phase: f64,
    /// Smallest overlap modulus in the finest chain.
    pub min_overlap_modulus: f64,
}

#[derive(Debug, Clone, Copy)]
struct ChainSums {
    phase: f64,
    max_segment_phase: f64,
    min_modulus: f64,
}

/// The geometric phase carried by a cyclic chain of overlaps,
/// `-sum arg(o_k)`, with per-segment diagnostics. The chain phase is
/// invariant under rephasing of the individual states because every state
/// enters once as bra and once as ket.
fn chain_phase(overlaps: &[Complex64]) -> Result<ChainSums> {
    let mut phase = 0.0;
    let mut max_segment_phase = 0.0f64;
    let mut min_modulus = f64::INFINITY;
    for o in overlaps {
        let modulus = o.norm();
        if !(modulus > OVERLAP_FLOOR) {
            return Err(Error::domain(
                "holonomy",
                format!("consecutive loop states are nearly orthogonal (|o| = {modulus:.3e})"),
            ));
        }
        let segment = o.arg();
        phase -= segment;
        max_segment_phase = max_segment_phase.max(segment.abs());
        min_modulus = min_modulus.min(modulus);
    }
    Ok(ChainSums {
        phase,
        max_segment_phase,
        min_modulus,
    })
}

/// The geometric phase of a closed chain of overlaps, `-sum_k arg(o_k)`.
/// Rephasing any single state shifts two adjacent link arguments by
/// opposite amounts, so the total is invariant as long as no link is
/// pushed across the branch cut.
pub fn overlap_chain_phase(overlaps: &[Complex64]) -> Result<f64> {
    Ok(chain_phase(overlaps)?.phase)
}

fn chain_at(
    background: &dyn Background,
    alpha: f64,
    sites: &[Point],
    gap_index: usize,
    tol: &Tolerance,
) -> Result<ChainSums> {
    let states: Vec<BoundState<'_>> = sites
        .par_iter()
        .map(|&s| solve_level_required(background, alpha, s, gap_index, tol))
        .collect::<Result<Vec<_>>>()?;
    let n = states.len();
    let overlaps: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|k| Ok(state_overlap(&states[k], &states[(k + 1) % n], tol)?.value))
        .collect::<Result<Vec<_>>>()?;
    chain_phase(&overlaps)
}

/// The loop phase measured by discrete transport: solve the level at every
/// site of the loop, chain the neighboring overlaps, and accumulate the
/// phase. The chain subdivides until every segment rotates by less than
/// [`SEGMENT_PHASE_BOUND`] with overlap moduli above
/// [`SEGMENT_MODULUS_BOUND`], then one further doubling feeds the
/// extrapolated headline value.
pub fn discrete_holonomy(
    background: &dyn Background,
    alpha: f64,
    spec: &LoopSpec,
    gap_index: usize,
    tol: &Tolerance,
) -> Result<HolonomyOutcome> {
    let mut factor = 1;
    let coarse = loop {
        let sites = loop_sites(spec, factor)?;
        let sums = chain_at(background, alpha, &sites, gap_index, tol)?;
        if sums.max_segment_phase < SEGMENT_PHASE_BOUND
            && sums.min_modulus > SEGMENT_MODULUS_BOUND
        {
            break sums;
        }
        factor *= 2;
        if factor > MAX_REFINEMENT {
            return Err(Error::domain(
                "holonomy",
                format!(
                    "segments still rotate by {:.3} after {MAX_REFINEMENT}-fold refinement",
                    sums.max_segment_phase
                ),
            ));
        }
    };
    let fine_sites = loop_sites(spec, 2 * factor)?;
    let fine = chain_at(background, alpha, &fine_sites, gap_index, tol)?;
    Ok(HolonomyOutcome {
        phase: fine.phase,
        refined_phase: (4.0 * fine.phase - coarse.phase) / 3.0,
        segments: fine_sites.len(),
        max_segment_phase: fine.max_segment_phase,
        min_overlap_modulus: fine.min_modulus,
    })
}

/// Everything the loop-phase report carries: the connection line integral,
/// the discrete-transport oracle, the flux-derivative contribution, and the
/// flux through the loop in quanta.
#[derive(Debug, Clone)]
pub struct LoopPhase {
    /// `∮ V_theta rho dtheta` through the preferred connection route.
    pub formula: f64,
    /// The route that produced `formula`.
    pub route: ConnectionRoute,
    /// Discrete-transport measurement with diagnostics.
    pub holonomy: HolonomyOutcome,
    /// `-2 dE0/dxi0` at the loop's first site: the part of the phase fed by
    /// the level's flux-density slope.
    pub persistent_current_term: f64,
    /// Flux through the loop in flux quanta.
    pub flux_quanta: f64,
}

/// Compute the loop phase through both the connection formula and the
/// discrete-transport oracle, preferring the angular-momentum route and
/// falling back to flux-density differences where no closed momentum form
/// exists.
pub fn loop_phase(
    background: &dyn Background,
    alpha: f64,
    spec: &LoopSpec,
    gap_index: usize,
    tol: &Tolerance,
) -> Result<LoopPhase> {
    let sites = loop_sites(spec, 1)?;
    let first = sites[0];
    let (formula, route) = match connection_phase(
        background,
        alpha,
        spec,
        gap_index,
        ConnectionRoute::AngularMomentum,
        tol,
    ) {
        Ok(v) => (v, ConnectionRoute::AngularMomentum),
        Err(Error::NotAvailable { .. }) => (
            connection_phase(
                background,
                alpha,
                spec,
                gap_index,
                ConnectionRoute::FluxDerivative,
                tol,
            )?,
            ConnectionRoute::FluxDerivative,
        ),
        Err(e) => return Err(e),
    };
    let holonomy = discrete_holonomy(background, alpha, spec, gap_index, tol)?;
    let persistent_current_term =
        -2.0 * flux_density_slope(background, alpha, first, gap_index, tol)?;
    let flux_quanta = spec.flux_quanta(background.xi0(), background.eta())?;
    Ok(LoopPhase {
        formula,
        route,
        holonomy,
        persistent_current_term,
        flux_quanta,
    })
}
