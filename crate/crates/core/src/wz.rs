//! Matrix-valued transport of the degenerate Landau multiplet that stays
//! orthogonal to a movable point perturbation.
//!
//! A point perturbation at site `s` splits exactly one state out of each
//! Landau level; the rest of the level remains degenerate and is spanned,
//! for the lowest level, by
//!
//! `chi_m(r; s) = e^{-i pi xi0 (r ^ s)} Psi_m(r - s)`, `m = 1..N`,
//!
//! where `Psi_m` are the site-centered angular-momentum states that vanish
//! at the site (`w^m e^{-|w|^2/2}` up to normalization, with the complex
//! coordinate `w` chiral in the sign of the flux density `xi0`) and the
//! prefactor is the magnetic translation phase, `r ^ s` the wedge product.
//! Moving the site drags the whole multiplet, and the geometric evolution
//! of coefficients is governed by the matrix connection
//! `A_mu(s) = <chi_n | d chi_m / d s_mu>`, which is exactly linear in `s`:
//!
//! `A_x = i pi xi0 y' I + (sqrt(n) d_{m,n-1} - sqrt(m) d_{n,m-1}) / (sqrt(2) a0)`
//! `A_y = -i pi xi0 x' I - i sigma (sqrt(n) d_{m,n-1} + sqrt(m) d_{n,m-1}) / (sqrt(2) a0)`
//!
//! (`a0` the magnetic length, `sigma` the chirality). The commutator term
//! cancels the derivative term everywhere except in the first and last
//! channel, so the curvature is `2 pi i xi0 diag(1, 0, ..., 0, -(N+1))`:
//! the multiplet is flat in its interior, all the geometry sits in the
//! first channel (and a truncation artifact in the last). The holonomy of
//! a loop enclosing signed area `S` therefore carries
//! `U_11 = exp(-2 pi i xi0 S)` on the first channel, the matrix analogue
//! of the area law for the bound state.
//!
//! Transport is the ordered product of midpoint-rule segment exponentials
//! `U <- exp(-(A_x dx + A_y dy)) U`, with segments subdivided so each
//! generator stays small; the exponential is a scaled-squaring Taylor sum,
//! kept in-house so the product is bitwise reproducible.

use crate::error::{Error, Result};
use crate::model::Point;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Per-step generator norm above which a segment is subdivided.
const STEP_NORM: f64 = 0.05;

/// Scaled-squaring threshold for the matrix exponential.
const EXPM_SCALE: f64 = 0.25;

/// Taylor terms allowed in the matrix exponential before giving up; with
/// the scaled norm below 1/4 convergence takes ~20.
const EXPM_TERMS: usize = 60;

/// The truncated degenerate multiplet of the lowest Landau level over a
/// point perturbation: `n_states` channels at flux density `xi0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelBasis {
    xi0: f64,
    n_states: usize,
}

impl LevelBasis {
    /// A multiplet of `n_states` channels at flux density `xi0` (quanta
    /// per unit area; its sign is the chirality).
    pub fn new(xi0: f64, n_states: usize) -> Result<Self> {
        if !(xi0.is_finite() && xi0 != 0.0) {
            return Err(Error::domain(
                "level basis",
                format!("flux density must be finite and nonzero, got {xi0}"),
            ));
        }
        if n_states < 4 {
            return Err(Error::domain(
                "level basis",
                format!("the multiplet needs at least 4 channels, got {n_states}"),
            ));
        }
        Ok(LevelBasis { xi0, n_states })
    }

    /// Flux density in quanta per unit area.
    pub fn xi0(&self) -> f64 {
        self.xi0
    }

    /// Number of channels kept.
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Cyclotron frequency `2 pi |xi0|`.
    pub fn omega_c(&self) -> f64 {
        2.0 * PI * self.xi0.abs()
    }

    /// Chirality: the sign of the flux density.
    pub fn chirality(&self) -> f64 {
        self.xi0.signum()
    }

    /// Magnetic length `omega_c^{-1/2}`.
    pub fn magnetic_length(&self) -> f64 {
        1.0 / self.omega_c().sqrt()
    }

    /// The `m`-th basis state (`m = 1..=n_states`) at field point `r` for
    /// the multiplet anchored at `site`.
    pub fn state(&self, m: usize, site: Point, r: Point) -> Result<Complex64> {
        if m == 0 || m > self.n_states {
            return Err(Error::domain(
                "level basis",
                format!("channel {m} outside 1..={}", self.n_states),
            ));
        }
        let oc = self.omega_c();
        let u = r - site;
        let scale = (0.5 * oc).sqrt();
        let w = Complex64::new(scale * u.x, scale * self.chirality() * u.y);
        let mut factorial = 1.0;
        for k in 2..=m {
            factorial *= k as f64;
        }
        let norm = (oc / (2.0 * PI * factorial)).sqrt();
        let gauss = (-0.5 * w.norm_sqr()).exp();
        let phase = Complex64::from_polar(1.0, -PI * self.xi0 * r.wedge(site));
        Ok(phase * norm * w.powu(m as u32) * gauss)
    }

    /// The `x` component of the matrix connection at `site`.
    pub fn connection_x(&self, site: Point) -> DMatrix<Complex64> {
        let n = self.n_states;
        let ladder = 1.0 / (2.0_f64.sqrt() * self.magnetic_length());
        let mut a = DMatrix::zeros(n, n);
        let diag = Complex64::new(0.0, PI * self.xi0 * site.y);
        for i in 0..n {
            a[(i, i)] = diag;
        }
        for m in 2..=n {
            // (m, m-1): +sqrt(m); (m-1, m): -sqrt(m); 1-indexed channels.
            let v = (m as f64).sqrt() * ladder;
            a[(m - 1, m - 2)] = Complex64::new(v, 0.0);
            a[(m - 2, m - 1)] = Complex64::new(-v, 0.0);
        }
        a
    }

    /// The `y` component of the matrix connection at `site`.
    pub fn connection_y(&self, site: Point) -> DMatrix<Complex64> {
        let n = self.n_states;
        let ladder = 1.0 / (2.0_f64.sqrt() * self.magnetic_length());
        let mut a = DMatrix::zeros(n, n);
        let diag = Complex64::new(0.0, -PI * self.xi0 * site.x);
        for i in 0..n {
            a[(i, i)] = diag;
        }
        for m in 2..=n {
            let v = -self.chirality() * (m as f64).sqrt() * ladder;
            a[(m - 1, m - 2)] = Complex64::new(0.0, v);
            a[(m - 2, m - 1)] = Complex64::new(0.0, v);
        }
        a
    }

    /// The curvature `dA + A ^ A`, assembled from the connection matrices
    /// themselves: the derivative part is an exact difference (the
    /// connection is linear in the site), the wedge is the commutator.
    pub fn curvature(&self, site: Point) -> DMatrix<Complex64> {
        let h = 1.0;
        let ex = Point::new(h, 0.0);
        let ey = Point::new(0.0, h);
        let d_ay = (self.connection_y(site + ex) - self.connection_y(site - ex))
            / Complex64::from(2.0 * h);
        let d_ax = (self.connection_x(site + ey) - self.connection_x(site - ey))
            / Complex64::from(2.0 * h);
        let ax = self.connection_x(site);
        let ay = self.connection_y(site);
        d_ay - d_ax + &ax * &ay - &ay * &ax
    }

    /// The closed form the curvature must equal:
    /// `2 pi i xi0 diag(1, 0, ..., 0, -(N+1))`.
    pub fn small_loop_generator(&self) -> DMatrix<Complex64> {
        let n = self.n_states;
        let unit = Complex64::new(0.0, 2.0 * PI * self.xi0);
        let mut g = DMatrix::zeros(n, n);
        g[(0, 0)] = unit;
        g[(n - 1, n - 1)] = -unit * (n as f64 + 1.0);
        g
    }

    /// Transport the multiplet once around the closed loop through
    /// `points` (closing edge implied). Segments are subdivided so every
    /// step generator stays below a fixed norm.
    pub fn transport(&self, points: &[Point]) -> Result<Transport> {
        if points.len() < 3 {
            return Err(Error::DegenerateLoop(format!(
                "transport needs at least 3 loop points, got {}",
                points.len()
            )));
        }
        let dim = self.n_states;
        let mut unitary = DMatrix::identity(dim, dim);
        let mut steps = 0usize;
        let mut max_step_norm = 0.0_f64;
        for k in 0..points.len() {
            let a = points[k];
            let b = points[(k + 1) % points.len()];
            let span = b - a;
            let whole = self.segment_generator(a + span * 0.5, span);
            let parts = (frobenius(&whole) / STEP_NORM).ceil().max(1.0) as usize;
            for j in 0..parts {
                let mid = a + span * ((j as f64 + 0.5) / parts as f64);
                let g = self.segment_generator(mid, span * (1.0 / parts as f64));
                max_step_norm = max_step_norm.max(frobenius(&g));
                unitary = expm(&-g) * unitary;
                steps += 1;
            }
        }
        Ok(Transport {
            unitary,
            steps,
            max_step_norm,
        })
    }

    /// `A_x dx + A_y dy` at the segment midpoint.
    fn segment_generator(&self, mid: Point, step: Point) -> DMatrix<Complex64> {
        self.connection_x(mid) * Complex64::from(step.x)
            + self.connection_y(mid) * Complex64::from(step.y)
    }
}

/// The ordered-product holonomy of one loop.
#[derive(Debug, Clone)]
pub struct Transport {
    unitary: DMatrix<Complex64>,
    steps: usize,
    max_step_norm: f64,
}

impl Transport {
    /// The accumulated unitary.
    pub fn unitary(&self) -> &DMatrix<Complex64> {
        &self.unitary
    }

    /// Number of exponential steps taken.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Largest generator norm among the steps.
    pub fn max_step_norm(&self) -> f64 {
        self.max_step_norm
    }

    /// Phase of the first-channel diagonal entry, where the area law
    /// lives.
    pub fn leading_phase(&self) -> f64 {
        self.unitary[(0, 0)].arg()
    }

    /// Frobenius defect `|U^+ U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.unitary.nrows();
        let defect = self.unitary.adjoint() * &self.unitary
            - DMatrix::<Complex64>::identity(dim, dim);
        frobenius(&defect)
    }

    /// Eigenphases of the holonomy, sorted ascending.
    pub fn eigenphases(&self) -> Result<Vec<f64>> {
        let schur = self.unitary.clone().schur();
        let values = schur.eigenvalues().ok_or_else(|| {
            Error::domain("holonomy", "Schur iteration did not expose eigenvalues".to_string())
        })?;
        let mut phases: Vec<f64> = values.iter().map(|z| z.arg()).collect();
        phases.sort_by(|a, b| a.total_cmp(b));
        Ok(phases)
    }
}

/// Frobenius norm.
fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Matrix exponential by scaling-and-squaring on a plain Taylor sum; the
/// generators here are anti-Hermitian with small norm, where this is
/// accurate and, unlike a library path, bitwise reproducible.
pub fn expm(g: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let dim = g.nrows();
    let norm = frobenius(g);
    let squarings = if norm > EXPM_SCALE {
        (norm / EXPM_SCALE).log2().ceil() as u32
    } else {
        0
    };
    let scaled = g * Complex64::from(0.5_f64.powi(squarings as i32));
    let mut acc = DMatrix::<Complex64>::identity(dim, dim);
    let mut term = DMatrix::<Complex64>::identity(dim, dim);
    for k in 1..=EXPM_TERMS {
        term = (&term * &scaled) * Complex64::from(1.0 / k as f64);
        acc += &term;
        if frobenius(&term) <= 1e-18 * frobenius(&acc) {
            break;
        }
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}
