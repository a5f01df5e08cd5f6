//! Numerical kernels: special functions, quadrature, series, root finding.
//!
//! Everything downstream (spectral functions, Green functions, holonomies)
//! is assembled from the primitives in this module tree. All routines are
//! deterministic — identical inputs produce identical floating-point output —
//! and return structured errors instead of panicking on bad input or
//! non-convergence.

pub mod bessel;
pub mod gamma;
pub mod polylog;
pub mod quad;
pub mod roots;
pub mod series;
pub mod tricomi;

use serde::{Deserialize, Serialize};

/// Convergence targets shared by quadratures, series, and root searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Absolute tolerance floor.
    pub abs_tol: f64,
    /// Relative tolerance, scaled by the magnitude of the result.
    pub rel_tol: f64,
    /// Budget for adaptive refinement (panels, terms, or iterations).
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_iter: 4000,
        }
    }
}

impl Tolerance {
    /// Construct with explicit targets and the default iteration budget.
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Tolerance {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    /// The acceptance threshold for a result of magnitude `scale`.
    pub fn target(&self, scale: f64) -> f64 {
        self.abs_tol + self.rel_tol * scale.abs()
    }

    /// Whether `err` meets the tolerance for a result of magnitude `scale`.
    pub fn accepts(&self, err: f64, scale: f64) -> bool {
        err <= self.target(scale)
    }

    /// A copy with both targets multiplied by `factor` (tighter when < 1).
    pub fn scaled(&self, factor: f64) -> Self {
        Tolerance {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            max_iter: self.max_iter,
        }
    }
}
