//! Versioned scenario/mission JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};
use soar_core::environment::{PowerConfig, Scenario, ThermalFieldConfig, ThermalSpec};
use soar_core::mission::{Geofence, MissionConfig};
use soar_core::thermal::ThermalParams;
use soar_core::Vec2;

use crate::error::{Result, SimError};

pub const SCHEMA_VERSION: u32 = 1;

type Xy = [f64; 2];

fn v(p: Xy) -> Vec2 {
    Vec2::new(p[0], p[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default = "default_site")]
    pub site: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub world: WorldSpec,
    #[serde(default)]
    pub mission: MissionSpec,
    #[serde(default = "default_aircraft")]
    pub aircraft: Vec<AircraftSpec>,
    #[serde(default)]
    pub experiment: ExperimentSpec,
}

fn default_site() -> String {
    "F".into()
}

fn default_aircraft() -> Vec<AircraftSpec> {
    vec![AircraftSpec::named("A"), AircraftSpec::named("B")]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldSpec {
    /// Wind over the ground, m/s (east, north).
    pub wind: Xy,
    /// When set, each seed draws a wind of uniform direction and speed in `[0, max]`.
    pub wind_random_max: Option<f64>,
    pub turbulence_sigma: f64,
    pub vario_sigma: f64,
    pub vario_rate: f64,
    pub sink_s0: f64,
    pub airspeed: f64,
    pub power: PowerSpec,
    pub thermals: Vec<ThermalEntry>,
    pub thermal_field: Option<FieldSpec>,
}

impl Default for WorldSpec {
    fn default() -> Self {
        let sc = Scenario::default();
        Self {
            wind: [0.0, 0.0],
            wind_random_max: None,
            turbulence_sigma: sc.turbulence_sigma,
            vario_sigma: sc.vario_sigma,
            vario_rate: sc.vario_rate,
            sink_s0: sc.sink_s0,
            airspeed: sc.airspeed,
            power: PowerSpec::default(),
            thermals: Vec::new(),
            thermal_field: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSpec {
    pub motor_climb_rate: f64,
    pub motor_power: f64,
    pub avionics_power: f64,
    pub battery_j: f64,
}

impl Default for PowerSpec {
    fn default() -> Self {
        let p = PowerConfig::default();
        Self {
            motor_climb_rate: p.motor_climb_rate,
            motor_power: p.motor_power,
            avionics_power: p.avionics_power,
            battery_j: p.battery_j,
        }
    }
}

/// A thermal given explicitly. `center` is its ground position at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalEntry {
    pub w0: f64,
    pub r0: f64,
    pub center: Xy,
    #[serde(default)]
    pub birth: f64,
    #[serde(default = "forever")]
    pub lifetime: f64,
    #[serde(default)]
    pub drift: Xy,
}

fn forever() -> f64 {
    1e9
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSpec {
    pub mean_interval: f64,
    pub horizon: f64,
    pub w0: Xy,
    pub r0: Xy,
    pub lifetime: Xy,
    /// `[[min_x, min_y], [max_x, max_y]]`, ground frame.
    pub area: [Xy; 2],
    pub drift_sigma: f64,
}

impl Default for FieldSpec {
    fn default() -> Self {
        let f = ThermalFieldConfig::default();
        Self {
            mean_interval: f.mean_interval,
            horizon: f.horizon,
            w0: [f.w0.0, f.w0.1],
            r0: [f.r0.0, f.r0.1],
            lifetime: [f.lifetime.0, f.lifetime.1],
            area: [[f.area.0.x, f.area.0.y], [f.area.1.x, f.area.1.y]],
            drift_sigma: f.drift_sigma,
        }
    }
}

impl FieldSpec {
    pub fn to_config(&self) -> ThermalFieldConfig {
        ThermalFieldConfig {
            mean_interval: self.mean_interval,
            horizon: self.horizon,
            w0: (self.w0[0], self.w0[1]),
            r0: (self.r0[0], self.r0[1]),
            lifetime: (self.lifetime[0], self.lifetime[1]),
            area: (v(self.area[0]), v(self.area[1])),
            drift_sigma: self.drift_sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionSpec {
    pub waypoints: Vec<Xy>,
    pub geofence: Vec<Xy>,
    pub alt_min: f64,
    pub alt_cutoff: f64,
    pub alt_max: f64,
    pub detect_threshold: f64,
    pub exit_threshold: f64,
    pub exit_hold: f64,
    pub detect_filter_tau: f64,
    pub acceptance_radius: f64,
    pub nav_gain: f64,
    pub nav_max_bank_deg: f64,
}

impl Default for MissionSpec {
    fn default() -> Self {
        let m = MissionConfig::default();
        Self {
            waypoints: m.waypoints.iter().map(|p| [p.x, p.y]).collect(),
            geofence: m.geofence.0.iter().map(|p| [p.x, p.y]).collect(),
            alt_min: m.alt_min,
            alt_cutoff: m.alt_cutoff,
            alt_max: m.alt_max,
            detect_threshold: m.detect_threshold,
            exit_threshold: m.exit_threshold,
            exit_hold: m.exit_hold,
            detect_filter_tau: m.detect_filter_tau,
            acceptance_radius: m.acceptance_radius,
            nav_gain: m.nav_gain,
            nav_max_bank_deg: m.nav_max_bank.to_degrees(),
        }
    }
}

impl MissionSpec {
    pub fn to_config(&self) -> MissionConfig {
        MissionConfig {
            waypoints: self.waypoints.iter().copied().map(v).collect(),
            geofence: Geofence(self.geofence.iter().copied().map(v).collect()),
            alt_min: self.alt_min,
            alt_cutoff: self.alt_cutoff,
            alt_max: self.alt_max,
            detect_threshold: self.detect_threshold,
            exit_threshold: self.exit_threshold,
            exit_hold: self.exit_hold,
            detect_filter_tau: self.detect_filter_tau,
            acceptance_radius: self.acceptance_radius,
            nav_gain: self.nav_gain,
            nav_max_bank: self.nav_max_bank_deg.to_radians(),
            ..MissionConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AircraftSpec {
    pub name: String,
    #[serde(default = "one")]
    pub battery_scale: f64,
    #[serde(default = "one")]
    pub sink_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl AircraftSpec {
    pub fn named(name: &str) -> Self {
        Self { name: name.into(), battery_scale: 1.0, sink_scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Paired flights in a sweep.
    pub flights: u32,
    pub baseline_repetitions: u32,
    /// Simulation cut-off per flight, s.
    pub max_time: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self { flights: 10, baseline_repetitions: 3, max_time: 4.0 * 3600.0 }
    }
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Input { path: path.into(), source })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|source| SimError::Json { path: origin.into(), source })?;
        file.check()?;
        Ok(file)
    }

    fn check(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SimError::Scenario(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.aircraft.len() != 2 {
            return Err(SimError::Scenario(format!("expected 2 aircraft, got {}", self.aircraft.len())));
        }
        if self.experiment.baseline_repetitions == 0 {
            return Err(SimError::Scenario("baseline_repetitions must be at least 1".into()));
        }
        if let Some(m) = self.world.wind_random_max {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(SimError::Scenario(format!("wind_random_max must be non-negative, got {m}")));
            }
        }
        self.mission.to_config().validate()?;
        self.world(self.seed).validate()?;
        Ok(())
    }

    /// The world realization for `seed`: wind and generated thermals are drawn
    /// from a stream no flight uses.
    pub fn world(&self, seed: u64) -> Scenario {
        use rand::Rng;
        let mut rng = soar_core::flight::stream(seed, WORLD_SLOT, 0);
        let w = &self.world;
        let wind = match w.wind_random_max {
            Some(max) => {
                let dir = rng.random::<f64>() * std::f64::consts::TAU;
                let speed = rng.random::<f64>() * max;
                Vec2::new(speed * dir.sin(), speed * dir.cos())
            }
            None => v(w.wind),
        };
        let mut thermals: Vec<ThermalSpec> = w
            .thermals
            .iter()
            .map(|t| ThermalSpec {
                params: ThermalParams { w0: t.w0, r0: t.r0, center: v(t.center) },
                birth: t.birth,
                lifetime: t.lifetime,
                drift: v(t.drift),
            })
            .collect();
        if let Some(f) = &w.thermal_field {
            thermals.extend(f.to_config().generate(wind, &mut rng));
        }
        Scenario {
            thermals,
            wind,
            turbulence_sigma: w.turbulence_sigma,
            vario_sigma: w.vario_sigma,
            vario_rate: w.vario_rate,
            sink_s0: w.sink_s0,
            airspeed: w.airspeed,
            power: PowerConfig {
                motor_climb_rate: w.power.motor_climb_rate,
                motor_power: w.power.motor_power,
                avionics_power: w.power.avionics_power,
                battery_j: w.power.battery_j,
            },
            seed,
        }
    }
}

/// Random-stream slot reserved for world generation.
pub const WORLD_SLOT: u64 = 1 << 20;
