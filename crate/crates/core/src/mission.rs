//! Mission profile: waypoint gliding, motor climbs between altitude bands, and
//! thermalling entry and exit.
//!
//! Modes follow the climb/glide/thermal cycle. The motor climbs from `alt_min`
//! to `alt_cutoff`, then the aircraft glides along the waypoints. Sufficient
//! filtered lift below `alt_max` starts thermalling. Thermalling ends at
//! `alt_max`, at `alt_min`, on a geofence breach, or when the lift has been gone
//! for `exit_hold` seconds.

use alloc::vec::Vec;

use crate::dynamics::wrap_angle;
use crate::error::{Error, Result};
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlightMode {
    AutoClimb,
    AutoGlide,
    Thermalling,
}

impl FlightMode {
    pub const ALL: [FlightMode; 3] = [FlightMode::AutoClimb, FlightMode::AutoGlide, FlightMode::Thermalling];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FlightMode::AutoClimb => "AUTO_CLIMB",
            FlightMode::AutoGlide => "AUTO_GLIDE",
            FlightMode::Thermalling => "THERMALLING",
        }
    }
}

/// Which controller flies the thermalling mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThermalController {
    Pomdsoar,
    Baseline,
}

impl ThermalController {
    pub fn as_str(self) -> &'static str {
        match self {
            ThermalController::Pomdsoar => "pomdsoar",
            ThermalController::Baseline => "baseline",
        }
    }
}

/// Simple polygon in the ground frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Geofence(pub Vec<Vec2>);

impl Geofence {
    /// Even-odd containment test.
    pub fn contains(&self, p: Vec2) -> bool {
        let v = &self.0;
        let mut inside = false;
        let mut j = v.len().wrapping_sub(1);
        for i in 0..v.len() {
            let (a, b) = (v[i], v[j]);
            if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
                inside = !inside;
            }
            j = i;
        }
        inside
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionConfig {
    /// Course flown cyclically, ground frame, m.
    pub waypoints: Vec<Vec2>,
    pub geofence: Geofence,
    pub alt_min: f64,
    pub alt_cutoff: f64,
    pub alt_max: f64,
    /// Filtered netto lift that triggers thermalling, m/s.
    pub detect_threshold: f64,
    /// Thermalling is abandoned when filtered lift stays below this...
    pub exit_threshold: f64,
    /// ...for this long, s.
    pub exit_hold: f64,
    /// Low-pass time constant of the detection filter, s.
    pub detect_filter_tau: f64,
    pub soaring_enabled: bool,
    pub controller: ThermalController,
    /// Waypoint acceptance radius, m.
    pub acceptance_radius: f64,
    /// Bank per radian of course error.
    pub nav_gain: f64,
    /// Bank limit outside thermalling, rad.
    pub nav_max_bank: f64,
}

impl Default for MissionConfig {
    fn default() -> Self {
        let waypoints: Vec<Vec2> = (0..5)
            .map(|k| {
                let a = core::f64::consts::TAU * k as f64 / 5.0;
                Vec2::new(220.0 * libm::sin(-a), 220.0 * libm::cos(a))
            })
            .collect();
        Self {
            waypoints,
            geofence: Geofence(alloc::vec![
                Vec2::new(-350.0, -350.0),
                Vec2::new(350.0, -350.0),
                Vec2::new(350.0, 350.0),
                Vec2::new(-350.0, 350.0),
            ]),
            alt_min: 50.0,
            alt_cutoff: 110.0,
            alt_max: 160.0,
            detect_threshold: 0.5,
            exit_threshold: 0.0,
            exit_hold: 8.0,
            detect_filter_tau: 2.0,
            soaring_enabled: true,
            controller: ThermalController::Pomdsoar,
            acceptance_radius: 20.0,
            nav_gain: 1.0,
            nav_max_bank: 25f64.to_radians(),
        }
    }
}

impl MissionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alt_min < self.alt_cutoff && self.alt_cutoff < self.alt_max) {
            return Err(Error::InvalidConfig("altitude bands must satisfy alt_min < alt_cutoff < alt_max"));
        }
        if self.waypoints.len() < 3 {
            return Err(Error::InvalidConfig("at least 3 waypoints are required"));
        }
        if self.geofence.0.len() < 3 {
            return Err(Error::InvalidConfig("geofence needs at least 3 vertices"));
        }
        if !self.waypoints.iter().all(|w| self.geofence.contains(*w)) {
            return Err(Error::InvalidConfig("geofence must contain every waypoint"));
        }
        if !(self.detect_filter_tau > 0.0) {
            return Err(Error::InvalidConfig("detect_filter_tau must be positive"));
        }
        if !(self.acceptance_radius > 0.0 && self.nav_max_bank > 0.0) {
            return Err(Error::InvalidConfig("navigation parameters must be positive"));
        }
        Ok(())
    }
}

/// Inputs to one mode-machine update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeInputs {
    /// Altitude, m.
    pub h: f64,
    pub ground_position: Vec2,
    pub filtered_lift: f64,
    /// Time since the previous update, s.
    pub dt: f64,
}

/// Flight mode plus the lost-lift timer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMachine {
    pub mode: FlightMode,
    pub lift_lost_for: f64,
}

impl ModeMachine {
    pub fn new(mode: FlightMode) -> Self {
        Self { mode, lift_lost_for: 0.0 }
    }

    pub fn update(&mut self, cfg: &MissionConfig, inputs: &ModeInputs) -> FlightMode {
        *self = update_mode(cfg, *self, inputs);
        self.mode
    }
}

/// One transition of the mission state machine.
pub fn update_mode(cfg: &MissionConfig, state: ModeMachine, inputs: &ModeInputs) -> ModeMachine {
    let h = inputs.h;
    match state.mode {
        FlightMode::AutoClimb => {
            if h >= cfg.alt_cutoff {
                ModeMachine::new(FlightMode::AutoGlide)
            } else {
                state
            }
        }
        FlightMode::AutoGlide => {
            if h <= cfg.alt_min {
                ModeMachine::new(FlightMode::AutoClimb)
            } else if cfg.soaring_enabled
                && inputs.filtered_lift >= cfg.detect_threshold
                && h < cfg.alt_max
                && cfg.geofence.contains(inputs.ground_position)
            {
                ModeMachine::new(FlightMode::Thermalling)
            } else {
                state
            }
        }
        FlightMode::Thermalling => {
            let lost = if inputs.filtered_lift < cfg.exit_threshold { state.lift_lost_for + inputs.dt } else { 0.0 };
            if h >= cfg.alt_max
                || h <= cfg.alt_min
                || !cfg.geofence.contains(inputs.ground_position)
                || lost >= cfg.exit_hold
            {
                ModeMachine::new(FlightMode::AutoGlide)
            } else {
                ModeMachine { mode: FlightMode::Thermalling, lift_lost_for: lost }
            }
        }
    }
}

/// First-order low-pass: `y += (raw - y) * dt / tau`.
pub fn filter_lift(prev: f64, raw: f64, dt: f64, tau: f64) -> f64 {
    let alpha = if tau.is_infinite() { 0.0 } else { (dt / tau).min(1.0) };
    prev + (raw - prev) * alpha
}

/// Bank (rad) steering the ground course toward `waypoint`. Positive turns right.
pub fn waypoint_bank(cfg: &MissionConfig, position: Vec2, course: f64, waypoint: Vec2) -> f64 {
    let to = waypoint - position;
    let bearing = libm::atan2(to.x, to.y);
    (cfg.nav_gain * wrap_angle(bearing - course)).clamp(-cfg.nav_max_bank, cfg.nav_max_bank)
}

/// Cyclic waypoint follower.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Navigator {
    pub active: usize,
}

impl Navigator {
    /// Advances past reached waypoints and returns the bank command.
    pub fn bank(&mut self, cfg: &MissionConfig, position: Vec2, ground_velocity: Vec2) -> f64 {
        let n = cfg.waypoints.len();
        if (cfg.waypoints[self.active] - position).norm() < cfg.acceptance_radius {
            self.active = (self.active + 1) % n;
        }
        let course = libm::atan2(ground_velocity.x, ground_velocity.y);
        waypoint_bank(cfg, position, course, cfg.waypoints[self.active])
    }
}
