//! Torus geometry on the periodic square `[0, D)²`.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// A point on the torus; both coordinates lie in `[0, D)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    pub x1: f64,
    pub x2: f64,
}

impl TorusPoint {
    /// Builds a point from raw coordinates, wrapping into `[0, side)`.
    pub fn new(x1: f64, x2: f64, side: f64) -> Result<Self> {
        torus_wrap([x1, x2], side)
    }

    /// Caller guarantees both coordinates are already in `[0, side)`.
    pub(crate) fn from_wrapped(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    /// Moves by `(dx1, dx2)` and wraps. Inputs are assumed finite.
    #[inline]
    pub fn translate(self, dx1: f64, dx2: f64, side: f64) -> Self {
        Self { x1: wrap_coord(self.x1 + dx1, side), x2: wrap_coord(self.x2 + dx2, side) }
    }
}

/// Unit velocity stored by its angle; components are recomputed from the
/// angle whenever it changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVelocity {
    angle: f64,
    cos: f64,
    sin: f64,
}

impl UnitVelocity {
    pub fn from_angle(angle: f64) -> Self {
        let angle = wrap_coord(angle, TAU);
        let (sin, cos) = angle.sin_cos();
        Self { angle, cos, sin }
    }

    #[inline]
    pub fn angle(&self) -> f64 {
        self.angle
    }

    #[inline]
    pub fn components(&self) -> (f64, f64) {
        (self.cos, self.sin)
    }
}

#[inline]
pub(crate) fn wrap_coord(x: f64, side: f64) -> f64 {
    let r = x.rem_euclid(side);
    // rem_euclid can round up to `side` for tiny negative inputs.
    if r >= side {
        0.0
    } else {
        r
    }
}

/// Reduces each coordinate modulo `side` into `[0, side)`.
pub fn torus_wrap(p: [f64; 2], side: f64) -> Result<TorusPoint> {
    if !side.is_finite() || side <= 0.0 {
        return Err(crate::error::invalid("D", format!("torus side must be positive, got {side}")));
    }
    if !p[0].is_finite() || !p[1].is_finite() {
        return Err(Error::NonFinite("torus_wrap point"));
    }
    Ok(TorusPoint::from_wrapped(wrap_coord(p[0], side), wrap_coord(p[1], side)))
}

/// Signed minimum-image displacement along one axis, in `[-side/2, side/2]`.
#[inline]
pub fn min_image_delta(a: f64, b: f64, side: f64) -> f64 {
    let mut d = b - a;
    let half = 0.5 * side;
    if d > half {
        d -= side;
    } else if d < -half {
        d += side;
    }
    d
}

/// Squared minimum-image distance; avoids the square root in hot loops.
#[inline]
pub fn torus_distance_sq(p: TorusPoint, q: TorusPoint, side: f64) -> f64 {
    let d1 = min_image_delta(p.x1, q.x1, side);
    let d2 = min_image_delta(p.x2, q.x2, side);
    d1 * d1 + d2 * d2
}

/// Euclidean distance under the minimum-image convention, in `[0, side/√2]`.
pub fn torus_distance(p: TorusPoint, q: TorusPoint, side: f64) -> f64 {
    torus_distance_sq(p, q, side).sqrt()
}

/// Infection rate of the homogeneous SIR reduction: `λ π R² / D²`.
pub fn beta_from_params(lambda: f64, r0_radius: f64, side: f64) -> f64 {
    lambda * PI * r0_radius * r0_radius / (side * side)
}
