//! Fixed-radius thermalling baseline.
//!
//! Circles the EKF's estimate of the thermal center at a constant radius. The bank
//! command is the coordinated-turn bank for that radius plus a PD correction on
//! radial distance error and radial speed. The turn direction is fixed for the
//! whole thermal encounter.

use crate::belief::GaussianBelief;
use crate::dynamics::{UavState, STANDARD_GRAVITY};
use crate::error::{ensure_positive, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    /// Circle radius, m.
    pub circle_radius: f64,
    /// Bank correction per metre of radial error, rad/m.
    pub kp: f64,
    /// Bank correction per m/s of radial speed, rad/(m/s).
    pub kd: f64,
    pub max_bank: f64,
    pub g: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            circle_radius: 60.0,
            kp: 1.0f64.to_radians(),
            kd: 2.0f64.to_radians(),
            max_bank: 45f64.to_radians(),
            g: STANDARD_GRAVITY,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("circle_radius", self.circle_radius)?;
        ensure_positive("max_bank", self.max_bank)
    }

    /// Bank that holds a steady circle of `circle_radius` at airspeed `v`.
    pub fn nominal_bank(&self, v: f64) -> f64 {
        libm::atan(v * v / (self.g * self.circle_radius))
    }
}

/// Circling direction. Right is positive bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurnDirection {
    Left,
    Right,
}

impl TurnDirection {
    fn sign(self) -> f64 {
        match self {
            TurnDirection::Left => -1.0,
            TurnDirection::Right => 1.0,
        }
    }
}

/// Per-encounter commitment; reset on thermal entry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TurnCommitment(pub Option<TurnDirection>);

impl TurnCommitment {
    pub fn direction(&mut self, current_bank: f64) -> TurnDirection {
        *self.0.get_or_insert(if current_bank > 0.0 { TurnDirection::Right } else { TurnDirection::Left })
    }
}

/// Radial distance error (m) and radial speed (m/s) relative to the estimated center.
pub fn radial_state(uav: &UavState, b: &GaussianBelief, radius: f64) -> (f64, f64) {
    // Vector from the center to the aircraft.
    let out = -b.center();
    let dist = out.norm();
    let rate = if dist > 1e-9 { uav.v * uav.heading_vector().dot(&(out / dist)) } else { 0.0 };
    (dist - radius, rate)
}

/// Bank command (rad) for circling the belief's center.
pub fn baseline_choose_bank(
    cfg: &BaselineConfig,
    uav: &UavState,
    b: &GaussianBelief,
    commitment: &mut TurnCommitment,
) -> f64 {
    let dir = commitment.direction(uav.phi).sign();
    let (err, rate) = radial_state(uav, b, cfg.circle_radius);
    let magnitude = cfg.nominal_bank(uav.v) + cfg.kp * err + cfg.kd * rate;
    (dir * magnitude).clamp(-cfg.max_bank, cfg.max_bank)
}
