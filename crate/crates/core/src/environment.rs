//! Ground-truth world: thermals, wind, sink polar, altitude and battery evolution,
//! and the netto variometer.
//!
//! The aircraft state lives in the air-mass frame. Thermal centers are given in
//! air-mass coordinates, which coincide with ground coordinates at `t = 0`; each
//! thermal therefore drifts over the ground with the wind. Ground position is the
//! air-mass position plus the integrated wind drift.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dynamics::{dynamics_step, AirframeParams, PidState, UavState};
use crate::error::{ensure_positive, Error, Result};
use crate::thermal::{lift_unchecked, ThermalParams};
use crate::Vec2;

/// Seconds over which a thermal's strength fades to zero after its lifetime.
pub const THERMAL_DECAY_S: f64 = 10.0;

/// One thermal with a lifecycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSpec {
    /// Strength, radius, and center in air-mass coordinates.
    pub params: ThermalParams,
    /// Time the thermal appears, s.
    pub birth: f64,
    /// Time it holds full strength, s.
    pub lifetime: f64,
    /// Extra drift relative to the air mass, m/s.
    pub drift: Vec2,
}

impl ThermalSpec {
    /// Strength multiplier at time `t`: 0 before birth, 1 while alive, then a
    /// linear fade over [`THERMAL_DECAY_S`].
    pub fn strength_factor(&self, t: f64) -> f64 {
        let age = t - self.birth;
        if age < 0.0 {
            0.0
        } else if age <= self.lifetime {
            1.0
        } else {
            (1.0 - (age - self.lifetime) / THERMAL_DECAY_S).max(0.0)
        }
    }

    /// The thermal as seen at time `t` (air-mass frame).
    pub fn at(&self, t: f64) -> ThermalParams {
        let age = (t - self.birth).max(0.0);
        ThermalParams {
            w0: self.params.w0 * self.strength_factor(t),
            r0: self.params.r0,
            center: self.params.center + self.drift * age,
        }
    }
}

/// Motor and battery model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConfig {
    /// Net still-air climb rate with the motor running, wings level, m/s.
    pub motor_climb_rate: f64,
    /// Electrical power while the motor runs, W.
    pub motor_power: f64,
    /// Always-on electrical load, W.
    pub avionics_power: f64,
    /// Usable battery energy, J.
    pub battery_j: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self { motor_climb_rate: 2.5, motor_power: 90.0, avionics_power: 3.0, battery_j: 15_600.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub thermals: Vec<ThermalSpec>,
    /// Wind over the ground, m/s.
    pub wind: Vec2,
    /// Std of white turbulence added to the true lift each control step, m/s.
    pub turbulence_sigma: f64,
    /// Variometer noise std, m/s.
    pub vario_sigma: f64,
    /// Variometer rate, Hz.
    pub vario_rate: f64,
    /// Still-air sink at the reference airspeed, m/s.
    pub sink_s0: f64,
    /// Reference (and constant) airspeed, m/s.
    pub airspeed: f64,
    pub power: PowerConfig,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            thermals: Vec::new(),
            wind: Vec2::zeros(),
            turbulence_sigma: 0.15,
            vario_sigma: 0.2,
            vario_rate: 5.0,
            sink_s0: 0.7,
            airspeed: 9.0,
            power: PowerConfig::default(),
            seed: 0,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("vario_rate", self.vario_rate)?;
        ensure_positive("airspeed", self.airspeed)?;
        for (name, v) in [
            ("turbulence_sigma", self.turbulence_sigma),
            ("vario_sigma", self.vario_sigma),
            ("sink_s0", self.sink_s0),
            ("battery_j", self.power.battery_j),
            ("motor_power", self.power.motor_power),
            ("avionics_power", self.power.avionics_power),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter { name, value: v });
            }
        }
        for th in &self.thermals {
            ensure_positive("thermal lifetime", th.lifetime)?;
            ensure_positive("thermal r0", th.params.r0)?;
        }
        Ok(())
    }

    /// Same scenario with every thermal removed.
    pub fn calm(&self) -> Self {
        Self { thermals: Vec::new(), ..self.clone() }
    }

    /// Load-factor-corrected sink at bank `phi`, m/s.
    pub fn sink(&self, phi: f64) -> f64 {
        sink(self.sink_s0, phi)
    }

    /// Sum of all thermals' lift at air-mass position `p` and time `t`.
    pub fn thermal_lift(&self, p: Vec2, t: f64) -> f64 {
        self.thermals
            .iter()
            .filter(|th| th.strength_factor(t) > 0.0)
            .map(|th| lift_unchecked(&th.at(t), p))
            .sum()
    }
}

/// `s0 * (1 / cos phi)^(3/2)`: sink grows with load factor in a turn.
pub fn sink(sink_s0: f64, phi: f64) -> f64 {
    sink_s0 * libm::pow(1.0 / libm::cos(phi), 1.5)
}

/// Mutable simulation state for one aircraft.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldState {
    pub t: f64,
    pub step: u64,
    /// Truth, air-mass frame.
    pub uav: UavState,
    pub pid: PidState,
    /// Integrated wind drift, m.
    pub ground_offset: Vec2,
    pub battery_j: f64,
    pub motor_on: bool,
    /// True airmass vertical velocity at the aircraft including turbulence, m/s.
    pub lift: f64,
    pub crashed: bool,
}

impl WorldState {
    pub fn new<R: Rng + ?Sized>(sc: &Scenario, uav: UavState, turbulence: &mut R) -> Self {
        let mut w = Self {
            t: 0.0,
            step: 0,
            uav,
            pid: PidState::default(),
            ground_offset: Vec2::zeros(),
            battery_j: sc.power.battery_j,
            motor_on: false,
            lift: 0.0,
            crashed: false,
        };
        w.lift = true_lift(sc, &w, turbulence);
        w
    }

    pub fn ground_position(&self) -> Vec2 {
        self.uav.p + self.ground_offset
    }
}

fn true_lift<R: Rng + ?Sized>(sc: &Scenario, w: &WorldState, turbulence: &mut R) -> f64 {
    let gust = if sc.turbulence_sigma > 0.0 {
        sc.turbulence_sigma * turbulence.sample::<f64, _>(StandardNormal)
    } else {
        0.0
    };
    sc.thermal_lift(w.uav.p, w.t) + gust
}

/// Vertical speed of the aircraft, m/s.
pub fn climb_rate(sc: &Scenario, w: &WorldState) -> f64 {
    let motor = if w.motor_on { sc.power.motor_climb_rate + sc.sink_s0 } else { 0.0 };
    w.lift - sc.sink(w.uav.phi) + motor
}

/// Advances the world by `dt`. The motor cuts out once the battery is empty.
pub fn env_step<R: Rng + ?Sized>(
    sc: &Scenario,
    airframe: &AirframeParams,
    w: &WorldState,
    target_bank: f64,
    dt: f64,
    turbulence: &mut R,
) -> WorldState {
    let mut next = *w;
    next.motor_on = w.motor_on && w.battery_j > 0.0;
    let vz = climb_rate(sc, &next);
    let mut pid = w.pid;
    let mut uav = dynamics_step(airframe, &w.uav, &mut pid, target_bank, dt);
    uav.h = w.uav.h + vz * dt;
    next.uav = uav;
    next.pid = pid;
    next.ground_offset = w.ground_offset + sc.wind * dt;
    let load = sc.power.avionics_power + if next.motor_on { sc.power.motor_power } else { 0.0 };
    next.battery_j = (w.battery_j - load * dt).max(0.0);
    next.step = w.step + 1;
    next.t = next.step as f64 * dt;
    next.crashed = w.crashed || uav.h <= 0.0;
    next.lift = true_lift(sc, &next, turbulence);
    next
}

/// Netto variometer emitting at a fixed rate.
#[derive(Debug, Clone)]
pub struct VarioSensor {
    interval: f64,
    emitted: u64,
    sigma: f64,
    rng: ChaCha8Rng,
}

impl VarioSensor {
    pub fn new(sc: &Scenario, rng: ChaCha8Rng) -> Self {
        Self { interval: 1.0 / sc.vario_rate, emitted: 0, sigma: sc.vario_sigma, rng }
    }

    pub fn interval(&self) -> f64 {
        self.interval
    }

    /// A reading of the airmass vertical velocity at the aircraft when a sensor
    /// tick has elapsed by `w.t`, otherwise `None`.
    pub fn gen_observation(&mut self, w: &WorldState) -> Option<f64> {
        let due = (self.emitted + 1) as f64 * self.interval;
        if w.t + 1e-9 < due {
            return None;
        }
        self.emitted += 1;
        let noise = if self.sigma > 0.0 { self.sigma * self.rng.sample::<f64, _>(StandardNormal) } else { 0.0 };
        Some(w.lift + noise)
    }
}

/// Random thermal field description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalFieldConfig {
    /// Mean spacing between thermal births, s.
    pub mean_interval: f64,
    /// Births are generated over `[0, horizon)`, s.
    pub horizon: f64,
    pub w0: (f64, f64),
    pub r0: (f64, f64),
    pub lifetime: (f64, f64),
    /// Ground-frame box where thermals appear: `(min, max)` corners.
    pub area: (Vec2, Vec2),
    /// Std of per-thermal drift relative to the air mass, m/s.
    pub drift_sigma: f64,
}

impl Default for ThermalFieldConfig {
    fn default() -> Self {
        Self {
            mean_interval: 60.0,
            horizon: 7200.0,
            w0: (1.0, 3.0),
            r0: (40.0, 120.0),
            lifetime: (120.0, 360.0),
            area: (Vec2::new(-350.0, -350.0), Vec2::new(350.0, 350.0)),
            drift_sigma: 0.0,
        }
    }
}

impl ThermalFieldConfig {
    /// Samples thermals with exponential inter-arrival times. Each appears at a
    /// uniform ground position inside `area` and drifts with `wind` afterwards.
    pub fn generate<R: Rng + ?Sized>(&self, wind: Vec2, rng: &mut R) -> Vec<ThermalSpec> {
        let mut out = Vec::new();
        let mut t = 0.0;
        loop {
            let u: f64 = rng.random();
            t += -self.mean_interval * libm::log(1.0 - u);
            if t >= self.horizon {
                break;
            }
            let ground = Vec2::new(
                uniform(rng, self.area.0.x, self.area.1.x),
                uniform(rng, self.area.0.y, self.area.1.y),
            );
            let w0 = uniform(rng, self.w0.0, self.w0.1);
            let r0 = uniform(rng, self.r0.0, self.r0.1);
            let lifetime = uniform(rng, self.lifetime.0, self.lifetime.1);
            let drift = if self.drift_sigma > 0.0 {
                Vec2::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
                    * self.drift_sigma
            } else {
                Vec2::zeros()
            };
            out.push(ThermalSpec {
                params: ThermalParams { w0, r0, center: ground - wind * t },
                birth: t,
                lifetime,
                drift,
            });
        }
        out
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        lo + (hi - lo) * rng.random::<f64>()
    } else {
        lo
    }
}
