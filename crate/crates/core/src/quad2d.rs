//! Deterministic plane quadrature for products of localized kernels.
//!
//! Every geometric quantity assembled downstream — discrete holonomies of
//! perturbed eigenfunctions, the norm identity for the spectral-function
//! slope, radial-connection probes — reduces to a plane integral of a
//! product of resolvent kernels. Such integrands are smooth away from at
//! most three points (the two kernel anchors and the origin, where a trap
//! column may sit), decay at least exponentially at large distance, and
//! carry a phase that varies slowly around the anchor pair.
//!
//! A single polar patch centered on the anchor midpoint resolves this. The
//! radial direction uses adaptive panels split exactly at the anchor
//! distance, so the integrable logarithmic singularities sit at panel
//! endpoints where Gauss–Kronrod rules never place a node. In the angular
//! direction the ray integral is smooth except at the two angles whose rays
//! pass through the anchors, where it picks up corner and `φ ln φ` terms;
//! the angular domain is therefore split at exactly those angles and
//! integrated by adaptive Gauss–Kronrod panels, for which such endpoint
//! behavior is routine.
//!
//! Each refinement round evaluates all pending rays in one parallel batch,
//! but panels are assembled and summed strictly in angular order, so
//! results are bitwise reproducible for a given input regardless of thread
//! count.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::backgrounds::Background;
use crate::error::{Error, Result};
use crate::krein::BoundState;
use crate::model::Point;
use crate::numerics::quad::{integrate_complex, WG, WK, XK};
use crate::numerics::Tolerance;

/// The integrand at the patch boundary must stay below this fraction of its
/// peak, or the patch was drawn too small for the kernel's actual decay.
const TAIL_BOUND: f64 = 1e-12;
/// Narrowest angular panel before refinement is declared stuck.
const MIN_ANGULAR_SPAN: f64 = TAU * 9.094_947_017_729_282e-13; // 2^-40

/// A polar integration patch: rays fan out from `center`, anchored to the
/// axis `axis`, out to radius `extent`.
#[derive(Debug, Clone, Copy)]
pub struct PlanePatch {
    /// Center of the polar coordinate fan.
    pub center: Point,
    /// Angle of the ray pointing at the second kernel anchor; the angular
    /// domain is split at this angle and its opposite, where the ray
    /// integral loses smoothness.
    pub axis: f64,
    /// Radial cutoff of the patch.
    pub extent: f64,
    /// Radius at which every ray's radial panel is split (0 disables).
    /// Placing the kernel anchors at panel endpoints keeps their
    /// logarithmic singularities away from quadrature nodes.
    pub inner_split: f64,
}

impl PlanePatch {
    /// A patch with no interior panel split.
    pub fn new(center: Point, axis: f64, extent: f64) -> Result<Self> {
        let patch = PlanePatch {
            center,
            axis,
            extent,
            inner_split: 0.0,
        };
        patch.validate()?;
        Ok(patch)
    }

    /// The patch covering a product of two kernels anchored at `a` and `b`
    /// whose moduli are negligible beyond `reach_a` and `reach_b` of their
    /// anchors. The extent is inflated by the center offset from the
    /// origin, so a kernel component anchored at the origin (a trap column)
    /// stays covered no matter where the pair sits.
    pub fn covering(a: Point, b: Point, reach_a: f64, reach_b: f64) -> Result<Self> {
        let reach = reach_a.max(reach_b);
        if !(reach.is_finite() && reach > 0.0) {
            return Err(Error::domain(
                "plane patch",
                format!("kernel reach {reach:.3e} must be positive and finite"),
            ));
        }
        let center = (a + b) * 0.5;
        let sep = a.distance(b);
        let axis = if sep > 0.0 { (b - a).angle() } else { 0.0 };
        let patch = PlanePatch {
            center,
            axis,
            extent: reach + 0.5 * sep + center.norm(),
            inner_split: 0.5 * sep,
        };
        patch.validate()?;
        Ok(patch)
    }

    fn validate(&self) -> Result<()> {
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return Err(Error::domain(
                "plane patch",
                format!("extent {:.3e} must be positive and finite", self.extent),
            ));
        }
        if !(self.inner_split.is_finite() && (0.0..self.extent).contains(&self.inner_split)) {
            return Err(Error::domain(
                "plane patch",
                format!(
                    "inner split {:.3e} must lie inside [0, {:.3e})",
                    self.inner_split, self.extent
                ),
            ));
        }
        if !self.axis.is_finite() || !self.center.x.is_finite() || !self.center.y.is_finite() {
            return Err(Error::domain(
                "plane patch",
                "patch center and axis must be finite".to_string(),
            ));
        }
        Ok(())
    }
}

/// A converged plane integral together with its quality diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct PlaneOutcome {
    /// The integral over the patch.
    pub value: Complex64,
    /// Angular rays evaluated in total.
    pub angular_nodes: usize,
    /// Total integrand evaluations across all rays.
    pub evaluations: usize,
    /// Summed angular panel errors plus the radial error estimates.
    pub estimated_error: f64,
    /// Largest boundary sample divided by the peak integrand modulus.
    pub tail_ratio: f64,
}

#[derive(Debug, Clone, Copy)]
struct RaySample {
    /// Radial integral along the ray, Jacobian included.
    value: Complex64,
    /// Radial quadrature error estimate.
    error: f64,
    /// Integrand evaluations spent on this ray.
    evaluations: usize,
    /// Largest integrand modulus seen on this ray (Jacobian excluded).
    peak: f64,
    /// Integrand modulus at the patch boundary.
    tail: f64,
}

/// An angular panel awaiting a Gauss–Kronrod pass, in axis-relative angle.
#[derive(Debug, Clone, Copy)]
struct AngularPanel {
    a: f64,
    b: f64,
}

#[derive(Debug, Clone, Copy)]
struct EvaluatedPanel {
    a: f64,
    b: f64,
    value: Complex64,
    /// Gauss/Kronrod discrepancy, scaled to the panel length.
    error: f64,
    /// Radial error estimates propagated through the Kronrod weights; the
    /// angular discrepancy cannot be trusted below this floor.
    noise: f64,
    evaluations: usize,
    peak: f64,
    tail: f64,
}

/// The 15 Kronrod angles of a panel: center first, then (low, high) pairs
/// moving outward, matching the assembly order in `assemble`.
fn panel_angles(panel: &AngularPanel) -> [f64; 15] {
    let mid = 0.5 * (panel.a + panel.b);
    let half = 0.5 * (panel.b - panel.a);
    let mut angles = [0.0; 15];
    angles[0] = mid;
    for j in 1..8 {
        let dx = half * XK[j];
        angles[2 * j - 1] = mid - dx;
        angles[2 * j] = mid + dx;
    }
    angles
}

fn assemble(panel: &AngularPanel, rays: &[RaySample]) -> EvaluatedPanel {
    let half = 0.5 * (panel.b - panel.a);
    let mut kron = rays[0].value * WK[0];
    let mut gauss = rays[0].value * WG[0];
    let mut noise = rays[0].error * WK[0];
    let mut evaluations = rays[0].evaluations;
    let mut peak = rays[0].peak;
    let mut tail = rays[0].tail;
    for j in 1..8 {
        let lo = &rays[2 * j - 1];
        let hi = &rays[2 * j];
        let pair = lo.value + hi.value;
        kron += pair * WK[j];
        noise += (lo.error + hi.error) * WK[j];
        if j % 2 == 0 {
            gauss += pair * WG[j / 2];
        }
        evaluations += lo.evaluations + hi.evaluations;
        peak = peak.max(lo.peak).max(hi.peak);
        tail = tail.max(lo.tail).max(hi.tail);
    }
    EvaluatedPanel {
        a: panel.a,
        b: panel.b,
        value: kron * half,
        error: (kron - gauss).norm() * half,
        noise: noise * half,
        evaluations,
        peak,
        tail,
    }
}

fn ray_integral<F>(f: &F, patch: &PlanePatch, angle: f64, rtol: &Tolerance) -> Result<RaySample>
where
    F: Fn(Point) -> Result<Complex64> + Sync,
{
    let dir = Point::new(angle.cos(), angle.sin());
    let mut peak = 0.0f64;
    let mut evaluations = 0usize;
    let mut radial = |rho: f64| -> Result<Complex64> {
        let v = f(patch.center + dir * rho)?;
        peak = peak.max(v.norm());
        evaluations += 1;
        Ok(v * rho)
    };
    let value;
    let error;
    let split = patch.inner_split;
    if split > 0.0 {
        let lower = integrate_complex(&mut radial, 0.0, split, rtol)?;
        let upper = integrate_complex(&mut radial, split, patch.extent, rtol)?;
        value = lower.value + upper.value;
        error = lower.error + upper.error;
    } else {
        let whole = integrate_complex(&mut radial, 0.0, patch.extent, rtol)?;
        value = whole.value;
        error = whole.error;
    }
    let tail = f(patch.center + dir * patch.extent)?.norm();
    evaluations += 1;
    Ok(RaySample {
        value,
        error,
        evaluations,
        peak,
        tail,
    })
}

/// Integrate `f` over the plane through the polar patch.
///
/// Angular panels start as the two half-circles meeting at the anchor
/// angles and bisect adaptively; each panel is accepted once its
/// Gauss–Kronrod discrepancy drops below its share of the tolerance (or
/// below the radial noise floor, which the angular test cannot undercut).
/// Rays of a refinement round are evaluated in one parallel batch. After
/// convergence the boundary samples must sit below `TAIL_BOUND` of the
/// peak integrand modulus, certifying that the patch truncation is
/// negligible. `tol.max_iter` caps the total number of rays.
pub fn integrate_patch<F>(f: &F, patch: &PlanePatch, tol: &Tolerance) -> Result<PlaneOutcome>
where
    F: Fn(Point) -> Result<Complex64> + Sync,
{
    patch.validate()?;
    // Radial targets sit below the angular acceptance threshold so ray
    // noise cannot mask the panel convergence test.
    let rtol = tol.scaled(0.1);

    let mut pending = vec![
        AngularPanel { a: 0.0, b: PI },
        AngularPanel { a: PI, b: TAU },
    ];
    let mut accepted: Vec<EvaluatedPanel> = Vec::new();
    let mut rays_spent = 0usize;
    let mut scale: Option<f64> = None;

    while !pending.is_empty() {
        if rays_spent > tol.max_iter {
            let partial: Complex64 = accepted.iter().map(|p| p.value).sum();
            return Err(Error::QuadratureNonConvergence {
                estimate: partial.norm(),
                error: f64::NAN,
                tol: tol.target(scale.unwrap_or(f64::NAN)),
            });
        }
        let angles: Vec<f64> = pending.iter().flat_map(panel_angles).collect();
        let rays: Vec<RaySample> = angles
            .par_iter()
            .map(|&phi| ray_integral(f, patch, patch.axis + phi, &rtol))
            .collect::<Result<Vec<_>>>()?;
        rays_spent += rays.len();

        let evaluated: Vec<EvaluatedPanel> = pending
            .iter()
            .enumerate()
            .map(|(k, p)| assemble(p, &rays[15 * k..15 * (k + 1)]))
            .collect();
        if scale.is_none() {
            let first: Complex64 = evaluated.iter().map(|p| p.value).sum();
            scale = Some(first.norm());
        }
        let target = tol.target(scale.unwrap_or(0.0));

        let mut next = Vec::new();
        for panel in evaluated {
            let span = panel.b - panel.a;
            let share = target * span / TAU;
            if panel.error <= share.max(3.0 * panel.noise) {
                accepted.push(panel);
            } else if span <= MIN_ANGULAR_SPAN {
                return Err(Error::QuadratureNonConvergence {
                    estimate: panel.value.norm(),
                    error: panel.error,
                    tol: share,
                });
            } else {
                let mid = 0.5 * (panel.a + panel.b);
                next.push(AngularPanel { a: panel.a, b: mid });
                next.push(AngularPanel { a: mid, b: panel.b });
            }
        }
        pending = next;
    }

    // Angular order makes the final reduction independent of the order in
    // which panels happened to converge.
    accepted.sort_by(|x, y| x.a.partial_cmp(&y.a).expect("panel bounds are finite"));
    let mut value = Complex64::new(0.0, 0.0);
    let mut estimated_error = 0.0;
    let mut evaluations = 0;
    let mut peak = 0.0f64;
    let mut tail = 0.0f64;
    for panel in &accepted {
        value += panel.value;
        estimated_error += panel.error + panel.noise;
        evaluations += panel.evaluations;
        peak = peak.max(panel.peak);
        tail = tail.max(panel.tail);
    }
    let tail_ratio = if peak > 0.0 { tail / peak } else { 0.0 };
    if tail_ratio > TAIL_BOUND {
        return Err(Error::domain(
            "plane patch",
            format!(
                "integrand at the patch boundary is {:.3e} of its peak; \
                 extent {:.3e} does not cover the kernel support",
                tail_ratio, patch.extent
            ),
        ));
    }
    Ok(PlaneOutcome {
        value,
        angular_nodes: rays_spent,
        evaluations,
        estimated_error,
        tail_ratio,
    })
}

/// The L² inner product of two normalized bound states,
/// `∫ conj(ψ_bra)(r) ψ_ket(r) d²r`.
pub fn state_overlap(
    bra: &BoundState<'_>,
    ket: &BoundState<'_>,
    tol: &Tolerance,
) -> Result<PlaneOutcome> {
    let patch = PlanePatch::covering(
        bra.site(),
        ket.site(),
        bra.decay_radius(),
        ket.decay_radius(),
    )?;
    let f = |r: Point| -> Result<Complex64> { Ok(bra.eval(r)?.conj() * ket.eval(r)?) };
    integrate_patch(&f, &patch, tol)
}

/// The squared L² norm of the resolvent kernel pinned at `site`,
/// `∫ |G(r, site; e)|² d²r`. In every spectral gap this equals the energy
/// slope of the spectral function at that site, which is how the slope
/// reported by the solver is certified.
pub fn resolvent_norm_integral(
    background: &dyn Background,
    site: Point,
    energy: f64,
    tol: &Tolerance,
) -> Result<PlaneOutcome> {
    let reach = background.decay_radius(energy);
    let patch = PlanePatch::covering(site, site, reach, reach)?;
    let f = |r: Point| -> Result<Complex64> {
        let g = background.green(r, site, energy)?;
        Ok(Complex64::new(g.norm_sqr(), 0.0))
    };
    integrate_patch(&f, &patch, tol)
}
