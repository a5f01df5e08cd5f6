//! Bound states of two-dimensional magnetic Hamiltonians with a movable
//! point perturbation, and the geometric phases picked up when the
//! perturbation site is carried around a closed loop.
//!
//! The library is organized around a resolvent-based description: each
//! background Hamiltonian exposes its Green function `G(r, s; E)` and the
//! regularized diagonal `Q(E; s)`, the point perturbation of strength
//! `alpha` binds a state wherever `Q(E) + alpha = 0` inside a spectral gap,
//! and geometric quantities (Berry connection, loop phases, Wilson loops)
//! are built from the resulting normalized eigenfunctions.

pub mod backgrounds;
pub mod berry;
pub mod error;
pub mod krein;
pub mod model;
pub mod numerics;
pub mod quad2d;
pub mod ring;
pub mod wz;

pub use error::{Error, Result};
pub use model::Tolerance;
