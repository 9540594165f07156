//! Closed-loop simulation of one mission.
//!
//! Each 0.02 s tick reads the variometer when due, feeds the detection filter and,
//! while thermalling, the thermal EKF, steps the mode machine, computes a bank
//! command from the navigator or the active thermalling controller, and advances
//! the world.

use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baseline::{baseline_choose_bank, BaselineConfig, TurnCommitment};
use crate::belief::{GaussianBelief, NoiseConfig};
use crate::dynamics::{AirframeParams, UavState, CONTROL_DT};
use crate::environment::{env_step, Scenario, VarioSensor, WorldState};
use crate::error::Result;
use crate::mission::{filter_lift, FlightMode, MissionConfig, ModeInputs, ModeMachine, Navigator, ThermalController};
use crate::planner::{choose_action, PlannerConfig, PlannerDecision, PlannerMode};
use crate::Vec2;

/// Telemetry is recorded every this many control steps (0.2 s).
pub const TELEMETRY_EVERY: u64 = 10;

const STREAM_TURBULENCE: u64 = 1;
const STREAM_SENSOR: u64 = 2;
const STREAM_PLANNER: u64 = 3;

/// Independent random stream for `(seed, slot, purpose)`.
pub fn stream(seed: u64, slot: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(slot * 16 + purpose);
    rng
}

/// Thermalling controller settings shared by both controllers.
#[derive(Debug, Clone, PartialEq)]
pub struct SoaringConfig {
    pub planner: PlannerConfig,
    pub baseline: BaselineConfig,
    pub noise: NoiseConfig,
    /// Belief assigned on every thermal entry.
    pub prior: GaussianBelief,
    /// Planner invocation period, s.
    pub replan_period: f64,
}

impl Default for SoaringConfig {
    fn default() -> Self {
        Self {
            planner: PlannerConfig::default(),
            baseline: BaselineConfig::default(),
            noise: NoiseConfig::default(),
            prior: GaussianBelief::default(),
            replan_period: 1.0,
        }
    }
}

/// A physical aircraft: airframe constants plus battery and polar deviations
/// from the scenario's nominal values.
#[derive(Debug, Clone, PartialEq)]
pub struct Aircraft {
    pub name: String,
    pub airframe: AirframeParams,
    pub battery_scale: f64,
    pub sink_scale: f64,
}

impl Aircraft {
    pub fn nominal(name: &str) -> Self {
        Self { name: name.into(), airframe: AirframeParams::default(), battery_scale: 1.0, sink_scale: 1.0 }
    }

    /// The scenario as experienced by this aircraft.
    pub fn apply(&self, sc: &Scenario) -> Scenario {
        let mut out = sc.clone();
        out.power.battery_j *= self.battery_scale;
        out.sink_s0 *= self.sink_scale;
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndReason {
    BatteryExhausted,
    Crashed,
    TimeLimit,
}

impl EndReason {
    pub fn as_str(self) -> &'static str {
        match self {
            EndReason::BatteryExhausted => "battery_exhausted",
            EndReason::Crashed => "crashed",
            EndReason::TimeLimit => "time_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryRecord {
    pub t: f64,
    pub ground: Vec2,
    pub air: Vec2,
    pub h: f64,
    pub mode: FlightMode,
    pub phi: f64,
    pub target_bank: f64,
    /// Most recent vario reading.
    pub vario: Option<f64>,
    pub filtered_lift: f64,
    pub battery_j: f64,
    /// Thermal belief mean `(w0, r0, cx, cy)` while thermalling.
    pub belief_mean: Option<[f64; 4]>,
    pub belief_trace: Option<f64>,
    pub planner: Option<PlannerDecision>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlightStats {
    /// Flight time, s.
    pub duration: f64,
    pub energy_used_j: f64,
    /// Time spent per mode, indexed by [`FlightMode::index`].
    pub mode_time: [f64; 3],
    pub thermal_entries: u32,
    pub end_reason: EndReason,
    pub planner_cycles: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlightRecord {
    pub stats: FlightStats,
    pub telemetry: Vec<TelemetryRecord>,
}

/// Everything needed to fly one mission.
#[derive(Debug, Clone)]
pub struct FlightSetup<'a> {
    pub scenario: &'a Scenario,
    pub mission: &'a MissionConfig,
    pub soaring: &'a SoaringConfig,
    pub aircraft: &'a Aircraft,
    pub controller: ThermalController,
    /// Selects independent turbulence/sensor/planner streams for this aircraft.
    pub slot: u64,
    pub record_telemetry: bool,
    /// Simulation cut-off, s.
    pub max_time: f64,
}

impl<'a> FlightSetup<'a> {
    pub fn new(
        scenario: &'a Scenario,
        mission: &'a MissionConfig,
        soaring: &'a SoaringConfig,
        aircraft: &'a Aircraft,
        controller: ThermalController,
    ) -> Self {
        Self { scenario, mission, soaring, aircraft, controller, slot: 0, record_telemetry: false, max_time: 4.0 * 3600.0 }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.mission.validate()?;
        self.aircraft.airframe.validate()?;
        self.soaring.noise.validate()?;
        self.soaring.baseline.validate()?;
        self.soaring.planner.validate(&self.aircraft.airframe)
    }
}

/// Belief anchored at the aircraft position of its last update.
#[derive(Debug, Clone, Copy)]
struct ThermalTrack {
    belief: GaussianBelief,
    anchor: Vec2,
    updated_at: f64,
}

impl ThermalTrack {
    fn at(&self, p: Vec2, t: f64, noise: &NoiseConfig) -> GaussianBelief {
        self.belief.predict_shift(p - self.anchor, noise, t - self.updated_at)
    }

    fn observe(&mut self, reading: f64, p: Vec2, t: f64, noise: &NoiseConfig, prior: &GaussianBelief) {
        let predicted = self.at(p, t, noise);
        self.belief = match predicted.ekf_update(reading, noise) {
            Ok(b) => b,
            Err(e) => {
                log::warn!("thermal EKF reset at t={t}: {e}");
                *prior
            }
        };
        self.anchor = p;
        self.updated_at = t;
    }
}

/// Flies one mission to its end condition.
pub fn fly(setup: &FlightSetup<'_>) -> Result<FlightRecord> {
    setup.validate()?;
    let sc = setup.aircraft.apply(setup.scenario);
    let mission = setup.mission;
    let soaring = setup.soaring;
    let airframe = &setup.aircraft.airframe;
    let dt = CONTROL_DT;

    let mut turbulence = stream(sc.seed, setup.slot, STREAM_TURBULENCE);
    let mut sensor = VarioSensor::new(&sc, stream(sc.seed, setup.slot, STREAM_SENSOR));
    let mut planner_rng = stream(sc.seed, setup.slot, STREAM_PLANNER);

    let start = mission.waypoints[mission.waypoints.len() - 1];
    let first = mission.waypoints[0] - start;
    let psi0 = libm::atan2(first.x, first.y);
    let uav0 = UavState::level(start, sc.airspeed, psi0, mission.alt_cutoff);
    let mut w = WorldState::new(&sc, uav0, &mut turbulence);
    w.ground_offset = Vec2::zeros();
    // Air-mass and ground frames coincide at t = 0, so the start point is the
    // last waypoint in both.

    let mut modes = ModeMachine::new(FlightMode::AutoGlide);
    let mut nav = Navigator::default();
    let mut filtered = 0.0;
    let mut last_vario = None;
    let mut track: Option<ThermalTrack> = None;
    let mut commitment = TurnCommitment::default();
    let mut next_plan_at = 0.0;
    let mut planned_bank = 0.0;
    let mut last_decision: Option<PlannerDecision> = None;

    let mut stats = FlightStats {
        duration: 0.0,
        energy_used_j: 0.0,
        mode_time: [0.0; 3],
        thermal_entries: 0,
        end_reason: EndReason::TimeLimit,
        planner_cycles: 0,
    };
    let mut telemetry = Vec::new();

    loop {
        if let Some(reading) = sensor.gen_observation(&w) {
            filtered = filter_lift(filtered, reading, sensor.interval(), mission.detect_filter_tau);
            last_vario = Some(reading);
            if let Some(tr) = track.as_mut() {
                tr.observe(reading, w.uav.p, w.t, &soaring.noise, &soaring.prior);
            }
        }

        let previous = modes.mode;
        let mode = modes.update(
            mission,
            &ModeInputs { h: w.uav.h, ground_position: w.ground_position(), filtered_lift: filtered, dt },
        );
        if mode == FlightMode::Thermalling && previous != FlightMode::Thermalling {
            stats.thermal_entries += 1;
            track = Some(ThermalTrack { belief: soaring.prior, anchor: w.uav.p, updated_at: w.t });
            commitment = TurnCommitment::default();
            next_plan_at = w.t;
            last_decision = None;
        } else if mode != FlightMode::Thermalling {
            track = None;
        }

        let end = if w.crashed {
            Some(EndReason::Crashed)
        } else if mode == FlightMode::AutoClimb && w.battery_j <= 0.0 {
            Some(EndReason::BatteryExhausted)
        } else if w.t >= setup.max_time {
            Some(EndReason::TimeLimit)
        } else {
            None
        };
        if let Some(reason) = end {
            stats.end_reason = reason;
            break;
        }

        let current_belief = track.map(|tr| tr.at(w.uav.p, w.t, &soaring.noise));
        let target_bank = match (mode, current_belief) {
            (FlightMode::Thermalling, Some(b)) => match setup.controller {
                ThermalController::Pomdsoar => {
                    if w.t + 1e-9 >= next_plan_at {
                        let d = choose_action(&soaring.planner, &w.uav, &w.pid, &b, airframe, &soaring.noise, &mut planner_rng);
                        planned_bank = d.chosen_bank;
                        last_decision = Some(d);
                        next_plan_at += soaring.replan_period;
                        stats.planner_cycles += 1;
                    }
                    planned_bank
                }
                ThermalController::Baseline => baseline_choose_bank(&soaring.baseline, &w.uav, &b, &mut commitment),
            },
            _ => {
                let ground_velocity = w.uav.heading_vector() * w.uav.v + sc.wind;
                nav.bank(mission, w.ground_position(), ground_velocity)
            }
        };

        w.motor_on = mode == FlightMode::AutoClimb;
        stats.mode_time[mode.index()] += dt;

        if setup.record_telemetry && w.step.is_multiple_of(TELEMETRY_EVERY) {
            telemetry.push(TelemetryRecord {
                t: w.t,
                ground: w.ground_position(),
                air: w.uav.p,
                h: w.uav.h,
                mode,
                phi: w.uav.phi,
                target_bank,
                vario: last_vario,
                filtered_lift: filtered,
                battery_j: w.battery_j,
                belief_mean: current_belief.map(|b| [b.mean[0], b.mean[1], b.mean[2], b.mean[3]]),
                belief_trace: current_belief.map(|b| b.uncertainty(&soaring.planner.weights)),
                planner: if setup.controller == ThermalController::Pomdsoar { last_decision.clone() } else { None },
            });
        }

        w = env_step(&sc, airframe, &w, target_bank, dt, &mut turbulence);
    }

    stats.duration = w.t;
    stats.energy_used_j = sc.power.battery_j - w.battery_j;
    Ok(FlightRecord { stats, telemetry })
}

impl FlightRecord {
    pub fn thermalled(&self) -> bool {
        self.stats.thermal_entries > 0
    }

    pub fn planner_modes(&self) -> impl Iterator<Item = PlannerMode> + '_ {
        self.telemetry.iter().filter_map(|r| r.planner.as_ref().map(|d| d.mode))
    }
}
