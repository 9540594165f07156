//! Experiment plans: baselines, paired flights with controller swapping, sweeps.

use rayon::prelude::*;
use soar_core::experiment::{run_baseline, run_paired, PairedRun, PairedSetup, Slot};
use soar_core::flight::{fly, Aircraft, FlightRecord, FlightSetup};
use soar_core::mission::ThermalController;
use soar_core::Vec2;

use crate::config::SimConfig;
use crate::error::{Result, SimError};
use crate::scenario::ScenarioFile;

/// A scenario file with parameter overrides applied.
#[derive(Debug, Clone)]
pub struct Plan {
    pub file: ScenarioFile,
    pub config: SimConfig,
}

impl Plan {
    pub fn new(file: ScenarioFile, mut config: SimConfig) -> Result<Self> {
        // Parameter files change altitude bands and gains, but the course and
        // fence always come from the scenario.
        let from_file = file.mission.to_config();
        config.mission.waypoints = from_file.waypoints;
        config.mission.geofence = from_file.geofence;
        config.mission.validate()?;
        config.airframe.validate()?;
        config.soaring.planner.validate(&config.airframe)?;
        Ok(Self { file, config })
    }

    /// Scenario mission settings as the starting point for parameter overrides.
    pub fn base_config(file: &ScenarioFile) -> SimConfig {
        SimConfig { mission: file.mission.to_config(), ..SimConfig::default() }
    }

    pub fn aircraft(&self) -> Vec<Aircraft> {
        self.file
            .aircraft
            .iter()
            .map(|a| Aircraft {
                name: a.name.clone(),
                airframe: self.config.airframe,
                battery_scale: a.battery_scale,
                sink_scale: a.sink_scale,
            })
            .collect()
    }

    /// Calm-day baseline of every aircraft: thermals and wind removed, soaring off.
    pub fn baselines(&self, seed: u64) -> Result<Vec<f64>> {
        let mut calm = self.file.world(seed).calm();
        calm.wind = Vec2::zeros();
        let soaring = self.config.soaring_for(&calm);
        self.aircraft()
            .iter()
            .map(|ac| {
                run_baseline(&calm, &self.config.mission, &soaring, ac, self.file.experiment.baseline_repetitions)
                    .map_err(SimError::Simulation)
            })
            .collect()
    }

    /// One aircraft alone in the world of `seed`.
    pub fn run_single(&self, seed: u64, aircraft: usize, controller: ThermalController, telemetry: bool) -> Result<FlightRecord> {
        let sc = self.file.world(seed);
        let soaring = self.config.soaring_for(&sc);
        let acs = self.aircraft();
        let ac = acs
            .get(aircraft)
            .ok_or_else(|| SimError::Scenario(format!("aircraft index {aircraft} out of range")))?;
        let mut setup = FlightSetup::new(&sc, &self.config.mission, &soaring, ac, controller);
        setup.record_telemetry = telemetry;
        setup.max_time = self.file.experiment.max_time;
        fly(&setup).map_err(SimError::Simulation)
    }

    /// Flight id for the world of `seed`; zero-padded so ids sort numerically.
    pub fn flight_id(&self, seed: u64) -> String {
        format!("{}-{seed:08}", self.file.site)
    }

    /// Paired flight `index` of a plan. Controllers alternate between the two
    /// aircraft on consecutive indices so each flies each airframe equally often.
    pub fn run_pair(&self, seed: u64, index: u64, baselines: &[f64], telemetry: bool) -> Result<PairedRun> {
        let sc = self.file.world(seed);
        let soaring = self.config.soaring_for(&sc);
        let acs = self.aircraft();
        let (c0, c1) = if index.is_multiple_of(2) {
            (ThermalController::Pomdsoar, ThermalController::Baseline)
        } else {
            (ThermalController::Baseline, ThermalController::Pomdsoar)
        };
        let setup = PairedSetup {
            flight_id: self.flight_id(seed),
            site: self.file.site.clone(),
            scenario: &sc,
            mission: &self.config.mission,
            soaring: &soaring,
            slots: [
                Slot { aircraft: acs[0].clone(), controller: c0, baseline_time: baselines[0] },
                Slot { aircraft: acs[1].clone(), controller: c1, baseline_time: baselines[1] },
            ],
            record_telemetry: telemetry,
            max_time: self.file.experiment.max_time,
        };
        run_paired(&setup).map_err(SimError::Simulation)
    }

    /// `flights` paired flights on seeds `seed, seed + 1, ...`, run in parallel.
    /// Results are in seed order regardless of scheduling.
    pub fn sweep(&self, seed: u64, flights: u32, baselines: &[f64], telemetry: bool) -> Result<Vec<PairedRun>> {
        (0..flights as u64)
            .into_par_iter()
            .map(|k| self.run_pair(seed + k, k, baselines, telemetry))
            .collect()
    }
}
