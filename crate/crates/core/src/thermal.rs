//! Bell-shaped thermal lift model.
//!
//! Vertical air velocity falls off as a 2-D Gaussian around the thermal center:
//! `w(p) = w0 * exp(-|p - center|^2 / r0^2)`. The same type describes ground-truth
//! thermals in the simulator and sampled hypotheses inside the planner.
//!
//! In a belief the center is stored relative to the aircraft, i.e. thermal center
//! minus aircraft position, so the aircraft always sits at the origin.

use nalgebra::Vector4;

use crate::error::{ensure_positive, Result};
use crate::Vec2;

/// One bell-shaped updraft.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    /// Vertical air velocity at the center, m/s. Negative values model sink.
    pub w0: f64,
    /// Radius, m. Must be positive.
    pub r0: f64,
    /// Center position, m.
    pub center: Vec2,
}

impl ThermalParams {
    pub fn new(w0: f64, r0: f64, center: Vec2) -> Result<Self> {
        ensure_positive("r0", r0)?;
        Ok(Self { w0, r0, center })
    }

    /// Packs into the belief state ordering `(w0, r0, cx, cy)`.
    pub fn to_state(&self) -> Vector4<f64> {
        Vector4::new(self.w0, self.r0, self.center.x, self.center.y)
    }

    pub fn from_state(s: &Vector4<f64>) -> Self {
        Self { w0: s[0], r0: s[1], center: Vec2::new(s[2], s[3]) }
    }
}

/// Lift at `p` without validating `r0`. Callers guarantee `r0 > 0`.
#[inline]
pub(crate) fn lift_unchecked(th: &ThermalParams, p: Vec2) -> f64 {
    let dx = p.x - th.center.x;
    let dy = p.y - th.center.y;
    th.w0 * libm::exp(-(dx * dx + dy * dy) / (th.r0 * th.r0))
}

/// Vertical air velocity (m/s) induced by `th` at position `p`.
pub fn lift_at(th: &ThermalParams, p: Vec2) -> Result<f64> {
    ensure_positive("r0", th.r0)?;
    Ok(lift_unchecked(th, p))
}

/// Partial derivatives of the lift observed at the origin with respect to
/// `(w0, r0, cx, cy)`, where the center is relative to the observer.
pub fn lift_jacobian(th: &ThermalParams) -> Result<Vector4<f64>> {
    ensure_positive("r0", th.r0)?;
    Ok(jacobian_unchecked(th))
}

#[inline]
pub(crate) fn jacobian_unchecked(th: &ThermalParams) -> Vector4<f64> {
    let (cx, cy, r0) = (th.center.x, th.center.y, th.r0);
    let r0_sq = r0 * r0;
    let dist_sq = cx * cx + cy * cy;
    let shape = libm::exp(-dist_sq / r0_sq);
    let w = th.w0 * shape;
    Vector4::new(
        shape,
        2.0 * dist_sq * w / (r0_sq * r0),
        -2.0 * cx * w / r0_sq,
        -2.0 * cy * w / r0_sq,
    )
}
