use soar_core::dynamics::AirframeParams;
use soar_core::environment::Scenario;
use soar_core::flight::SoaringConfig;
use soar_core::mission::{MissionConfig, ThermalController};

/// Everything a parameter file can change.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub mission: MissionConfig,
    pub soaring: SoaringConfig,
    pub airframe: AirframeParams,
    /// Controller used by single-aircraft runs.
    pub controller: ThermalController,
    /// Charge bank-dependent sink to exploit arcs, using the scenario's polar.
    pub sink_correction: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            mission: MissionConfig::default(),
            soaring: SoaringConfig::default(),
            airframe: AirframeParams::default(),
            controller: ThermalController::Pomdsoar,
            sink_correction: true,
        }
    }
}

impl SimConfig {
    /// Soaring settings with the planner's sink model matched to `sc`.
    pub fn soaring_for(&self, sc: &Scenario) -> SoaringConfig {
        let mut s = self.soaring.clone();
        s.planner.sink_correction = self.sink_correction.then_some(sc.sink_s0);
        s
    }
}
