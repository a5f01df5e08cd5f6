//! Background Hamiltonians that the movable point perturbation probes.
//!
//! Each background exposes the three ingredients the resolvent construction
//! needs: the Green function `G(r, s; E)` at energies in a spectral gap, the
//! regularized diagonal `Q(E; s)` (the finite part of `G` at coincident
//! arguments), and the gap structure of its spectrum. Adding a point
//! perturbation of strength `alpha` at site `s` binds a state at each energy
//! where `Q(E; s) + alpha = 0` inside a gap, with normalized eigenfunction
//! `psi(r) = G(r, s; E_0) / sqrt(dQ/dE)`.
//!
//! Conventions: natural units, carrier charge sign `sigma_e = ±1`, uniform
//! field `b0` entering through `omega_c = |b0|` and `xi0 = sigma_e b0/(2 pi)`,
//! optional flux line of strength `eta` (in flux quanta) on the origin.

use crate::error::{Error, Result};
use crate::model::{ChargeSign, Gap, Point};
use num_complex::Complex64;

pub mod dot;
pub mod landau;
pub mod whisker;
pub mod zerorange;

pub use dot::ParabolicDot;
pub use landau::Landau;
pub use whisker::Whisker;
pub use zerorange::ZeroRangeDot;

/// A two-dimensional background Hamiltonian with known resolvent data.
///
/// Implementations must be deterministic: repeated calls with identical
/// arguments return bit-identical values.
pub trait Background: Send + Sync {
    /// Short lowercase identifier used in error messages and output records.
    fn name(&self) -> &'static str;

    /// Sign of the carrier charge.
    fn charge_sign(&self) -> ChargeSign;

    /// Signed flux density `xi0 = sigma_e b0 / (2 pi)` of the uniform field.
    fn xi0(&self) -> f64;

    /// Strength of the flux line at the origin, in flux quanta.
    fn eta(&self) -> f64 {
        0.0
    }

    /// The `k`-th spectral gap, counted from the semi-infinite bottom gap
    /// at `k = 0` upward.
    fn gap(&self, k: usize) -> Result<Gap>;

    /// Regularized diagonal of the Green function at energy `e` and site
    /// `site`; the bound-level condition is `Q(E; s) + alpha = 0`.
    fn q_function(&self, e: f64, site: Point) -> Result<f64>;

    /// Energy derivative `dQ/dE`, strictly positive inside gaps; its inverse
    /// square root normalizes the bound eigenfunction.
    fn q_derivative(&self, e: f64, site: Point) -> Result<f64>;

    /// Green function `G(r, s; E)` for `E` inside a gap, `r != s`.
    fn green(&self, r: Point, site: Point, e: f64) -> Result<Complex64>;

    /// Distance from the source beyond which `|G|` has decayed to a
    /// negligible fraction (~e^-45) of its near-field scale at energy `e`;
    /// used to size integration domains.
    fn decay_radius(&self, e: f64) -> f64;

    /// Azimuthal component of the singular (flux-line) part of the vector
    /// potential at radius `rho` from the origin; zero when no line is
    /// present. The uniform-field part is excluded by construction.
    fn azimuthal_vector_singular(&self, rho: f64) -> f64 {
        let _ = rho;
        0.0
    }

    /// Closed-form expectation of the angular momentum `-i d/d phi` in the
    /// normalized bound state at energy `e0` for a site at `site`, when the
    /// background admits one.
    fn angular_momentum(&self, e0: f64, site: Point) -> Result<f64> {
        let _ = (e0, site);
        Err(Error::NotAvailable {
            background: self.name(),
            what: "closed-form angular momentum",
        })
    }

    /// A copy of this background with the uniform flux density replaced by
    /// `xi0`, for finite-difference derivatives with respect to the field.
    fn rebuilt_at_xi0(&self, xi0: f64) -> Result<Box<dyn Background>> {
        let _ = xi0;
        Err(Error::NotAvailable {
            background: self.name(),
            what: "reconstruction at a shifted flux density",
        })
    }
}

/// Shared guard for coincident Green-function arguments.
pub(crate) fn require_distinct(r: Point, s: Point) -> Result<f64> {
    let d = r.distance(s);
    if d == 0.0 {
        return Err(Error::Coincidence);
    }
    Ok(d)
}
