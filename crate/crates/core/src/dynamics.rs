//! Sailplane roll, turn and position dynamics in the air-mass frame.
//!
//! The roll channel is a PID on bank error driving aileron deflection, which acts
//! against a roll-rate damping moment. Heading follows the coordinated-turn law and
//! position integrates the heading at constant airspeed. Everything runs as explicit
//! Euler at a fixed step, the same code path for the simulator and the planner's
//! trajectory prediction.
//!
//! Conventions: position is `(east, north)`, heading is measured clockwise from
//! north, and a positive bank turns right.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{ensure_positive, Error, Result};
use crate::Vec2;

pub const STANDARD_GRAVITY: f64 = 9.80665;
/// Control-loop period, s.
pub const CONTROL_DT: f64 = 0.02;
/// Default spacing of recorded trajectory samples, s.
pub const RECORD_DT: f64 = 0.2;

/// Roll-channel PID gains. Output is always clamped to `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Clamp on the accumulated integral contribution.
    pub integrator_limit: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self { kp: 0.03, ki: 0.0, kd: 0.001, integrator_limit: 0.3 }
    }
}

/// Mutable PID memory, passed explicitly so predictions can start from the live state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PidState {
    pub integrator: f64,
    pub prev_error: Option<f64>,
}

/// Airframe constants. Defaults are the Radian Pro values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirframeParams {
    /// Roll moment of inertia, kg m^2.
    pub i_x: f64,
    /// Roll damping derivative (negative).
    pub c_lp: f64,
    /// Roll damping coefficient.
    pub k_d: f64,
    /// Aileron effectiveness.
    pub k_a: f64,
    pub g: f64,
    pub pid: PidGains,
    /// Hard bank limit, rad.
    pub max_bank: f64,
    /// When set, bank is further limited to `stall_bank_limit`.
    pub stall_prevention: bool,
    pub stall_bank_limit: f64,
}

impl Default for AirframeParams {
    fn default() -> Self {
        Self {
            i_x: 0.002_574_82,
            c_lp: -1.128_087_04,
            k_d: 0.410_735_88,
            k_a: 1.448_331,
            g: STANDARD_GRAVITY,
            pid: PidGains::default(),
            max_bank: 45f64.to_radians(),
            stall_prevention: false,
            stall_bank_limit: 40f64.to_radians(),
        }
    }
}

impl AirframeParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("i_x", self.i_x)?;
        ensure_positive("k_a", self.k_a)?;
        ensure_positive("g", self.g)?;
        if !(self.c_lp < 0.0) {
            return Err(Error::InvalidParameter { name: "c_lp", value: self.c_lp });
        }
        if !(self.max_bank > 0.0 && self.max_bank < PI / 2.0) {
            return Err(Error::InvalidParameter { name: "max_bank", value: self.max_bank });
        }
        ensure_positive("stall_bank_limit", self.stall_bank_limit)?;
        Ok(())
    }

    /// Bank magnitude the aircraft is allowed to reach.
    pub fn bank_limit(&self) -> f64 {
        if self.stall_prevention {
            self.max_bank.min(self.stall_bank_limit)
        } else {
            self.max_bank
        }
    }
}

/// Kinematic state of the aircraft in the air-mass frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState {
    /// Position, m.
    pub p: Vec2,
    /// Airspeed, m/s.
    pub v: f64,
    /// Heading, rad in `[-pi, pi)`.
    pub psi: f64,
    /// Bank angle, rad.
    pub phi: f64,
    /// Roll rate, rad/s.
    pub phi_dot: f64,
    /// Altitude, m.
    pub h: f64,
}

impl UavState {
    pub fn level(p: Vec2, v: f64, psi: f64, h: f64) -> Self {
        Self { p, v, psi: wrap_angle(psi), phi: 0.0, phi_dot: 0.0, h }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("v", self.v)?;
        if !(self.phi.abs() < PI / 2.0) {
            return Err(Error::InvalidParameter { name: "phi", value: self.phi });
        }
        Ok(())
    }

    /// Unit vector along the heading.
    pub fn heading_vector(&self) -> Vec2 {
        Vec2::new(libm::sin(self.psi), libm::cos(self.psi))
    }
}

/// Coordinated turn at `target_bank` held for `duration` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollAction {
    pub target_bank: f64,
    pub duration: f64,
}

impl RollAction {
    pub fn new(target_bank: f64, duration: f64, max_bank: f64) -> Result<Self> {
        if !(target_bank.abs() <= max_bank + 1e-12) {
            return Err(Error::InvalidParameter { name: "target_bank", value: target_bank });
        }
        ensure_positive("duration", duration)?;
        Ok(Self { target_bank, duration })
    }
}

/// One recorded pose along a predicted trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub p: Vec2,
    pub phi: f64,
    pub psi: f64,
}

/// Poses sampled at a fixed interval, starting with the initial pose.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionTrajectory {
    pub target_bank: f64,
    pub points: Vec<TrajectoryPoint>,
}

/// Wraps an angle to `[-pi, pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = libm::fmod(a + PI, 2.0 * PI);
    let w = if w < 0.0 { w + 2.0 * PI } else { w };
    // fmod can land exactly on 2*pi after the correction above
    if w >= 2.0 * PI {
        -PI
    } else {
        w - PI
    }
}

/// Roll PID producing aileron deflection in `[-1, 1]`.
pub fn pid_roll(gains: &PidGains, bank_error: f64, dt: f64, state: &mut PidState) -> f64 {
    let limit = gains.integrator_limit.abs();
    state.integrator = (state.integrator + gains.ki * bank_error * dt).clamp(-limit, limit);
    let derivative = match state.prev_error {
        Some(prev) if dt > 0.0 => (bank_error - prev) / dt,
        _ => 0.0,
    };
    state.prev_error = Some(bank_error);
    (gains.kp * bank_error + state.integrator + gains.kd * derivative).clamp(-1.0, 1.0)
}

/// Roll damping moment.
#[inline]
pub fn roll_damping(params: &AirframeParams, phi_dot: f64, v: f64) -> f64 {
    -params.k_d * params.c_lp * phi_dot / (2.0 * v)
}

/// Coordinated-turn heading rate, rad/s.
#[inline]
pub fn turn_rate(g: f64, phi: f64, v: f64) -> f64 {
    g * libm::tan(phi) / v
}

/// Steady coordinated-turn radius, m.
pub fn turn_radius(g: f64, phi: f64, v: f64) -> f64 {
    v * v / (g * libm::tan(phi).abs())
}

/// Advances the aircraft by one explicit Euler step of length `dt`.
///
/// Airspeed and altitude are left untouched; altitude belongs to the environment.
pub fn dynamics_step(
    params: &AirframeParams,
    s: &UavState,
    pid: &mut PidState,
    target_bank: f64,
    dt: f64,
) -> UavState {
    let limit = params.bank_limit();
    let target = target_bank.clamp(-limit, limit);
    let aileron = pid_roll(&params.pid, target - s.phi, dt, pid);
    let damping = roll_damping(params, s.phi_dot, s.v);
    let phi_ddot = (params.k_a * aileron - damping) / params.i_x;
    let psi_dot = turn_rate(params.g, s.phi, s.v);

    let mut phi = s.phi + s.phi_dot * dt;
    let mut phi_dot = s.phi_dot + phi_ddot * dt;
    if phi > limit {
        phi = limit;
        phi_dot = phi_dot.min(0.0);
    } else if phi < -limit {
        phi = -limit;
        phi_dot = phi_dot.max(0.0);
    }

    UavState {
        p: s.p + Vec2::new(s.v * libm::sin(s.psi), s.v * libm::cos(s.psi)) * dt,
        v: s.v,
        psi: wrap_angle(s.psi + psi_dot * dt),
        phi,
        phi_dot,
        h: s.h,
    }
}

/// Integrates `action` from `s0` at [`CONTROL_DT`], recording a pose every
/// `dt_record` seconds including both `t = 0` and `t = duration`.
pub fn predict_trajectory(
    params: &AirframeParams,
    s0: &UavState,
    pid0: &PidState,
    action: &RollAction,
    dt_record: f64,
) -> ActionTrajectory {
    let record_every = steps_in(dt_record, CONTROL_DT).max(1);
    let n_records = steps_in(action.duration, dt_record);
    let mut points = Vec::with_capacity(n_records + 1);
    let mut s = *s0;
    let mut pid = *pid0;
    points.push(TrajectoryPoint { t: 0.0, p: s.p, phi: s.phi, psi: s.psi });
    for k in 1..=n_records {
        for _ in 0..record_every {
            s = dynamics_step(params, &s, &mut pid, action.target_bank, CONTROL_DT);
        }
        points.push(TrajectoryPoint {
            t: (k * record_every) as f64 * CONTROL_DT,
            p: s.p,
            phi: s.phi,
            psi: s.psi,
        });
    }
    ActionTrajectory { target_bank: action.target_bank, points }
}

/// Number of whole `step`s in `span`, tolerant to floating-point representation.
pub(crate) fn steps_in(span: f64, step: f64) -> usize {
    libm::round(span / step).max(0.0) as usize
}
