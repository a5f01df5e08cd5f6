//! Model-level types: geometry of sites and loops, charge and flux
//! bookkeeping, and the coupling-strength parametrization.
//!
//! Conventions (natural units `hbar = m = c = |e| = 1`):
//! the uniform field enters through `omega_c = |b0|` and the signed flux
//! density `xi0 = sigma_e b0 / (2 pi)`, where `sigma_e = ±1` is the carrier
//! charge sign. A closed loop of the perturbation site encloses
//! `Phi/Phi_0 = xi0 * area + eta * winding` flux quanta, the area being the
//! signed shoelace area and `eta` the fractional flux on the origin line.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub use crate::numerics::Tolerance;

/// Sign of the carrier charge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum ChargeSign {
    /// Positive carriers (`sigma_e = +1`).
    Positive,
    /// Negative carriers (`sigma_e = -1`).
    Negative,
}

impl ChargeSign {
    /// `sigma_e` as a float.
    pub fn sign(self) -> f64 {
        match self {
            ChargeSign::Positive => 1.0,
            ChargeSign::Negative => -1.0,
        }
    }
}

impl TryFrom<i8> for ChargeSign {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(ChargeSign::Positive),
            -1 => Ok(ChargeSign::Negative),
            other => Err(format!("charge_sign must be +1 or -1, got {other}")),
        }
    }
}

impl From<ChargeSign> for i8 {
    fn from(v: ChargeSign) -> i8 {
        match v {
            ChargeSign::Positive => 1,
            ChargeSign::Negative => -1,
        }
    }
}

/// Signed flux density `xi0 = sigma_e b0 / (2 pi)`.
pub fn xi0_of(charge_sign: ChargeSign, b0: f64) -> f64 {
    charge_sign.sign() * b0 / (2.0 * PI)
}

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    /// Cartesian x.
    pub x: f64,
    /// Cartesian y.
    pub y: f64,
}

impl Point {
    /// Construct from Cartesian components.
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Construct from polar data.
    pub fn from_polar(rho: f64, theta: f64) -> Self {
        Point {
            x: rho * theta.cos(),
            y: rho * theta.sin(),
        }
    }

    /// Euclidean norm.
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Polar angle in `(-pi, pi]`.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Dot product.
    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Wedge (2D cross) product `x s_y - y s_x`.
    pub fn wedge(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Distance to another point.
    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// A site position in polar coordinates about the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarPoint {
    /// Radial distance from the origin.
    pub rho: f64,
    /// Polar angle.
    pub theta: f64,
}

impl PolarPoint {
    /// Construct.
    pub fn new(rho: f64, theta: f64) -> Self {
        PolarPoint { rho, theta }
    }

    /// Cartesian image.
    pub fn to_point(self) -> Point {
        Point::from_polar(self.rho, self.theta)
    }
}

/// An open interval of the energy axis between two spectral branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    /// Lower edge; `-inf` for the semi-infinite bottom gap.
    pub lower: f64,
    /// Upper edge.
    pub upper: f64,
}

impl Gap {
    /// Construct, validating the ordering.
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::domain(
                "gap",
                format!("requires lower < upper, got [{lower}, {upper}]"),
            ));
        }
        Ok(Gap { lower, upper })
    }

    /// Whether `e` lies strictly inside.
    pub fn contains(&self, e: f64) -> bool {
        e > self.lower && e < self.upper
    }

    /// Whether the gap extends to `-inf`.
    pub fn is_bottom(&self) -> bool {
        self.lower == f64::NEG_INFINITY
    }

    /// Finite width, or `inf` for the bottom gap.
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Traversal orientation of a circular loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Counterclockwise (positive area).
    Ccw,
    /// Clockwise (negative area).
    Cw,
}

/// A closed loop of perturbation sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LoopSpec {
    /// A circle traversed at uniform angular steps.
    Circle {
        /// Circle radius.
        radius: f64,
        /// Circle center `[x, y]`.
        #[serde(default = "default_center")]
        center: [f64; 2],
        /// Traversal direction.
        #[serde(default = "default_orientation")]
        orientation: Orientation,
        /// Number of discrete sites on the loop.
        #[serde(default = "default_n_points")]
        n_points: usize,
    },
    /// A polygon given by its vertices, traversed in order.
    Polygon {
        /// Vertices `[x, y]` in traversal order (closing edge implied).
        vertices: Vec<[f64; 2]>,
    },
}

fn default_center() -> [f64; 2] {
    [0.0, 0.0]
}
fn default_orientation() -> Orientation {
    Orientation::Ccw
}
fn default_n_points() -> usize {
    200
}

impl LoopSpec {
    /// The loop as an ordered list of sites; the closing edge from the last
    /// point back to the first is implied, not repeated.
    pub fn discretize(&self) -> Result<Vec<Point>> {
        match self {
            LoopSpec::Circle {
                radius,
                center,
                orientation,
                n_points,
            } => {
                if !(*radius > 0.0) {
                    return Err(Error::DegenerateLoop(format!(
                        "circle radius must be positive, got {radius}"
                    )));
                }
                if *n_points < 3 {
                    return Err(Error::DegenerateLoop(format!(
                        "a circle needs at least 3 points, got {n_points}"
                    )));
                }
                let dir = match orientation {
                    Orientation::Ccw => 1.0,
                    Orientation::Cw => -1.0,
                };
                Ok((0..*n_points)
                    .map(|j| {
                        let t = dir * 2.0 * PI * j as f64 / *n_points as f64;
                        Point::new(center[0] + radius * t.cos(), center[1] + radius * t.sin())
                    })
                    .collect())
            }
            LoopSpec::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::DegenerateLoop(format!(
                        "a polygon needs at least 3 vertices, got {}",
                        vertices.len()
                    )));
                }
                let pts: Vec<Point> = vertices.iter().map(|v| Point::new(v[0], v[1])).collect();
                for (i, w) in pts.windows(2).enumerate() {
                    if w[0].distance(w[1]) == 0.0 {
                        return Err(Error::DegenerateLoop(format!(
                            "repeated consecutive vertex at index {i}"
                        )));
                    }
                }
                Ok(pts)
            }
        }
    }

    /// Flux through the ideal loop, in flux quanta: `xi0 * area` plus the
    /// line flux `eta` when the loop winds around the origin. Circles use
    /// the analytic area, so the value carries no discretization deficit.
    pub fn flux_quanta(&self, xi0: f64, eta: f64) -> Result<f64> {
        match self {
            LoopSpec::Circle {
                radius,
                center,
                orientation,
                ..
            } => {
                if !(*radius > 0.0) {
                    return Err(Error::DegenerateLoop(format!(
                        "circle radius must be positive, got {radius}"
                    )));
                }
                let dir = match orientation {
                    Orientation::Ccw => 1.0,
                    Orientation::Cw => -1.0,
                };
                let smooth = xi0 * dir * PI * radius * radius;
                if eta == 0.0 {
                    // The winding is immaterial without line flux, so a loop
                    // through the origin is still fine.
                    return Ok(smooth);
                }
                let offset = Point::new(center[0], center[1]).norm();
                let winding = if offset < *radius {
                    dir
                } else if offset > *radius {
                    0.0
                } else {
                    return Err(Error::LoopThroughOrigin);
                };
                Ok(smooth + eta * winding)
            }
            LoopSpec::Polygon { .. } => flux_through_loop(xi0, eta, &self.discretize()?),
        }
    }

    /// A copy with the point count scaled by `factor` (circles only);
    /// polygons are returned unchanged.
    pub fn refined(&self, factor: usize) -> LoopSpec {
        match self {
            LoopSpec::Circle {
                radius,
                center,
                orientation,
                n_points,
            } => LoopSpec::Circle {
                radius: *radius,
                center: *center,
                orientation: *orientation,
                n_points: n_points * factor,
            },
            poly => poly.clone(),
        }
    }
}

/// Signed (shoelace) area of the closed loop through `points`.
pub fn loop_area(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        twice += p.wedge(q);
    }
    0.5 * twice
}

/// Winding number of the closed loop about the origin.
///
/// Errors if a vertex sits at the origin or an edge passes through it, since
/// the enclosed line flux is then undefined.
pub fn winding_number(points: &[Point]) -> Result<i32> {
    let n = points.len();
    if n < 3 {
        return Err(Error::DegenerateLoop(format!(
            "winding number needs at least 3 points, got {n}"
        )));
    }
    let mut total = 0.0;
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        let np = p.norm();
        let nq = q.norm();
        let scale = np * nq;
        if np == 0.0 || nq == 0.0 {
            return Err(Error::LoopThroughOrigin);
        }
        let cross = p.wedge(q);
        let dot = p.dot(q);
        if cross.abs() < 1e-14 * scale && dot < 0.0 {
            return Err(Error::LoopThroughOrigin);
        }
        total += cross.atan2(dot);
    }
    Ok((total / (2.0 * PI)).round() as i32)
}

/// Flux through the loop in flux quanta:
/// `Phi/Phi_0 = xi0 * area + eta * winding`.
pub fn flux_through_loop(xi0: f64, eta: f64, points: &[Point]) -> Result<f64> {
    let winding = if eta == 0.0 {
        // The line contributes nothing; tolerate loops through the origin.
        match winding_number(points) {
            Ok(w) => w,
            Err(Error::LoopThroughOrigin) => 0,
            Err(e) => return Err(e),
        }
    } else {
        winding_number(points)?
    };
    Ok(xi0 * loop_area(points) + eta * winding as f64)
}

/// Coupling strength from the scattering-length parametrization:
/// `alpha = ln(1/lambda) / pi`, `lambda > 0`.
pub fn alpha_from_lambda(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(
            "alpha_from_lambda",
            format!("requires finite lambda > 0, got {lambda}"),
        ));
    }
    Ok((1.0 / lambda).ln() / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn charge_sign_serde() {
        let p: ChargeSign = serde_json::from_str("-1").unwrap();
        assert_eq!(p, ChargeSign::Negative);
        assert_eq!(serde_json::to_string(&ChargeSign::Positive).unwrap(), "1");
        assert!(serde_json::from_str::<ChargeSign>("0").is_err());
    }

    #[test]
    fn xi0_signs() {
        assert_relative_eq!(
            xi0_of(ChargeSign::Positive, 1.0),
            1.0 / (2.0 * PI),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            xi0_of(ChargeSign::Negative, 2.0),
            -1.0 / PI,
            max_relative = 1e-15
        );
    }

    #[test]
    fn wedge_orientation() {
        let ex = Point::new(1.0, 0.0);
        let ey = Point::new(0.0, 1.0);
        assert_relative_eq!(ex.wedge(ey), 1.0);
        assert_relative_eq!(ey.wedge(ex), -1.0);
    }

    #[test]
    fn shoelace_square() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        assert_relative_eq!(loop_area(&pts), 4.0);
        let rev: Vec<Point> = pts.iter().rev().copied().collect();
        assert_relative_eq!(loop_area(&rev), -4.0);
    }

    #[test]
    fn circle_discretization_area_converges() {
        let spec = LoopSpec::Circle {
            radius: 1.5,
            center: [0.3, -0.2],
            orientation: Orientation::Ccw,
            n_points: 400,
        };
        let pts = spec.discretize().unwrap();
        let area = loop_area(&pts);
        // Inscribed polygon area: pi R^2 (1 - (2 pi^2/3)/n^2 + ...)
        let expect = PI * 1.5 * 1.5;
        assert!((area - expect).abs() < expect * 1e-3);
        assert!(area < expect);
    }

    #[test]
    fn winding_numbers() {
        let circle = LoopSpec::Circle {
            radius: 1.0,
            center: [0.0, 0.0],
            orientation: Orientation::Ccw,
            n_points: 16,
        };
        let pts = circle.discretize().unwrap();
        assert_eq!(winding_number(&pts).unwrap(), 1);
        let rev: Vec<Point> = pts.iter().rev().copied().collect();
        assert_eq!(winding_number(&rev).unwrap(), -1);
        let off = LoopSpec::Circle {
            radius: 0.5,
            center: [3.0, 0.0],
            orientation: Orientation::Ccw,
            n_points: 16,
        };
        assert_eq!(winding_number(&off.discretize().unwrap()).unwrap(), 0);
    }

    #[test]
    fn loop_through_origin_is_rejected() {
        let pts = [
            Point::new(-1.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        // Edge from (-1,0) to (1,0) passes through the origin.
        assert!(matches!(
            winding_number(&pts),
            Err(Error::LoopThroughOrigin)
        ));
        assert!(flux_through_loop(0.1, 0.3, &pts).is_err());
        // With eta = 0 the line is absent and the flux is well-defined.
        assert!(flux_through_loop(0.1, 0.0, &pts).is_ok());
    }

    #[test]
    fn flux_combines_area_and_winding() {
        let spec = LoopSpec::Circle {
            radius: 1.0,
            center: [0.0, 0.0],
            orientation: Orientation::Ccw,
            n_points: 2000,
        };
        let pts = spec.discretize().unwrap();
        let f = flux_through_loop(0.5, 0.25, &pts).unwrap();
        assert_relative_eq!(f, 0.5 * loop_area(&pts) + 0.25, max_relative = 1e-12);
    }

    #[test]
    fn alpha_from_lambda_values() {
        assert_relative_eq!(alpha_from_lambda(1.0).unwrap(), 0.0);
        assert_relative_eq!(
            alpha_from_lambda((-PI).exp()).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            alpha_from_lambda(2.0).unwrap(),
            -(2.0_f64).ln() / PI,
            max_relative = 1e-14
        );
        assert!(alpha_from_lambda(0.0).is_err());
        assert!(alpha_from_lambda(-1.0).is_err());
    }

    #[test]
    fn loop_spec_parses_the_reference_form() {
        let json = r#"{"kind": "circle", "radius": 1.0, "center": [0,0],
                       "orientation": "ccw", "n_points": 200}"#;
        let spec: LoopSpec = serde_json::from_str(json).unwrap();
        let pts = spec.discretize().unwrap();
        assert_eq!(pts.len(), 200);
        assert!(serde_json::from_str::<LoopSpec>(
            r#"{"kind": "circle", "radius": 1.0, "bogus": 3}"#
        )
        .is_err());
    }

    #[test]
    fn polar_point_round_trip() {
        let s = PolarPoint::new(2.0, 0.7);
        let p = s.to_point();
        assert_relative_eq!(p.norm(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(p.angle(), 0.7, max_relative = 1e-15);
    }
}
