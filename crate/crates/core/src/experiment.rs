//! Evaluation protocol: no-soaring baselines, paired missions in a shared world,
//! relative time gains, win/loss/draw counting and the sign test.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flight::{fly, Aircraft, FlightRecord, FlightSetup, SoaringConfig};
use crate::mission::{MissionConfig, ThermalController};
use crate::environment::Scenario;

/// Gains closer than this many percentage points are a draw.
pub const DRAW_MARGIN_PP: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FlightSummary {
    pub flight_id: String,
    pub site: String,
    pub controller: ThermalController,
    pub airframe: String,
    /// s
    pub flight_time: f64,
    /// s
    pub baseline_time: f64,
    pub rel_gain: f64,
    pub thermal_encounters: u32,
    pub excluded: bool,
}

impl FlightSummary {
    pub fn gain_percent(&self) -> f64 {
        gain_percent(self.rel_gain)
    }
}

/// `flight_time / baseline_time`.
pub fn rel_gain(flight_time: f64, baseline_time: f64) -> Result<f64> {
    if !(baseline_time > 0.0 && baseline_time.is_finite()) {
        return Err(Error::InvalidParameter { name: "baseline_time", value: baseline_time });
    }
    if !(flight_time >= 0.0 && flight_time.is_finite()) {
        return Err(Error::InvalidParameter { name: "flight_time", value: flight_time });
    }
    Ok(flight_time / baseline_time)
}

/// Relative gain as a percentage increase over the baseline.
pub fn gain_percent(rel_gain: f64) -> f64 {
    (rel_gain - 1.0) * 100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Win,
    Loss,
    Draw,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Win => "win",
            Outcome::Loss => "loss",
            Outcome::Draw => "draw",
        }
    }
}

/// Outcome for the first of two percentage gains.
pub fn compare_gains(first_pct: f64, second_pct: f64) -> Outcome {
    let d = first_pct - second_pct;
    if d.abs() < DRAW_MARGIN_PP {
        Outcome::Draw
    } else if d > 0.0 {
        Outcome::Win
    } else {
        Outcome::Loss
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub wins: u32,
    pub losses: u32,
    pub draws: u32,
}

impl Tally {
    pub fn add(&mut self, o: Outcome) {
        match o {
            Outcome::Win => self.wins += 1,
            Outcome::Loss => self.losses += 1,
            Outcome::Draw => self.draws += 1,
        }
    }

    /// Two-sided exact sign test over the decisive flights.
    pub fn sign_test_p(&self) -> f64 {
        sign_test_p(self.wins, self.losses)
    }
}

/// Two-sided exact binomial sign test, `p = 1/2`, draws discarded.
pub fn sign_test_p(wins: u32, losses: u32) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    let k = wins.max(losses);
    // P(X >= k) for X ~ Bin(n, 1/2), summed in log space for large n.
    let ln_half_n = n as f64 * libm::log(0.5);
    let mut tail = 0.0;
    let mut ln_c = 0.0; // ln C(n, 0)
    for i in 0..=n {
        if i >= k {
            tail += libm::exp(ln_c + ln_half_n);
        }
        if i < n {
            ln_c += libm::log((n - i) as f64) - libm::log((i + 1) as f64);
        }
    }
    (2.0 * tail).min(1.0)
}

/// Median of a non-empty sample; `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// One flight in which two aircraft flew the same world side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedFlight {
    pub flights: [FlightSummary; 2],
}

impl PairedFlight {
    /// Excluded when exactly one of the two aircraft ever thermalled.
    pub fn excluded(&self) -> bool {
        (self.flights[0].thermal_encounters > 0) != (self.flights[1].thermal_encounters > 0)
    }

    pub fn by_controller(&self, c: ThermalController) -> Option<&FlightSummary> {
        self.flights.iter().find(|f| f.controller == c)
    }

    /// POMDSoar's result by relative gain; `None` when excluded or when the pair
    /// does not contain one flight per controller.
    pub fn outcome(&self) -> Option<Outcome> {
        let (p, b) = self.controllers()?;
        Some(compare_gains(p.gain_percent(), b.gain_percent()))
    }

    /// POMDSoar's result by raw flight time, ignoring the baselines.
    pub fn raw_outcome(&self) -> Option<Outcome> {
        let (p, b) = self.controllers()?;
        let pct = 100.0 * (p.flight_time - b.flight_time) / b.flight_time.max(f64::MIN_POSITIVE);
        Some(compare_gains(pct, 0.0))
    }

    fn controllers(&self) -> Option<(&FlightSummary, &FlightSummary)> {
        if self.excluded() {
            return None;
        }
        Some((self.by_controller(ThermalController::Pomdsoar)?, self.by_controller(ThermalController::Baseline)?))
    }
}

/// Aggregate over paired flights.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Flights sorted by id.
    pub flights: Vec<PairedFlight>,
    pub tally: Tally,
    pub p_value: f64,
    /// Same tally computed on raw flight time.
    pub raw_tally: Tally,
    pub median_gain_pomdsoar: Option<f64>,
    pub median_gain_baseline: Option<f64>,
    pub excluded: u32,
}

pub fn report(mut flights: Vec<PairedFlight>) -> Result<Report> {
    if flights.is_empty() {
        return Err(Error::InvalidConfig("report needs at least one flight"));
    }
    flights.sort_by(|a, b| a.flights[0].flight_id.cmp(&b.flights[0].flight_id));
    let mut tally = Tally::default();
    let mut raw_tally = Tally::default();
    let mut excluded = 0;
    let mut gp = Vec::new();
    let mut gb = Vec::new();
    for f in &mut flights {
        let ex = f.excluded();
        for s in &mut f.flights {
            s.excluded = ex;
        }
        if ex {
            excluded += 1;
            continue;
        }
        if let Some(o) = f.outcome() {
            tally.add(o);
        }
        if let Some(o) = f.raw_outcome() {
            raw_tally.add(o);
        }
        if let Some(p) = f.by_controller(ThermalController::Pomdsoar) {
            gp.push(p.rel_gain);
        }
        if let Some(b) = f.by_controller(ThermalController::Baseline) {
            gb.push(b.rel_gain);
        }
    }
    Ok(Report {
        p_value: tally.sign_test_p(),
        tally,
        raw_tally,
        median_gain_pomdsoar: median(&gp),
        median_gain_baseline: median(&gb),
        excluded,
        flights,
    })
}

/// Mean flight time with soaring disabled and thermals removed, over
/// `repetitions` seeds `seed, seed + 1, ...`.
pub fn run_baseline(
    scenario: &Scenario,
    mission: &MissionConfig,
    soaring: &SoaringConfig,
    aircraft: &Aircraft,
    repetitions: u32,
) -> Result<f64> {
    if repetitions == 0 {
        return Err(Error::InvalidConfig("baseline repetitions must be at least 1"));
    }
    let calm_mission = MissionConfig { soaring_enabled: false, ..mission.clone() };
    let mut total = 0.0;
    for k in 0..repetitions {
        let mut sc = scenario.calm();
        sc.seed = scenario.seed.wrapping_add(k as u64);
        let rec = fly(&FlightSetup::new(&sc, &calm_mission, soaring, aircraft, ThermalController::Baseline))?;
        total += rec.stats.duration;
    }
    Ok(total / repetitions as f64)
}

/// One aircraft's assignment within a paired flight.
#[derive(Debug, Clone)]
pub struct Slot {
    pub aircraft: Aircraft,
    pub controller: ThermalController,
    /// Baseline flight time of this aircraft, s.
    pub baseline_time: f64,
}

#[derive(Debug, Clone)]
pub struct PairedSetup<'a> {
    pub flight_id: String,
    pub site: String,
    pub scenario: &'a Scenario,
    pub mission: &'a MissionConfig,
    pub soaring: &'a SoaringConfig,
    pub slots: [Slot; 2],
    pub record_telemetry: bool,
    pub max_time: f64,
}

#[derive(Debug, Clone)]
pub struct PairedRun {
    pub paired: PairedFlight,
    pub records: [FlightRecord; 2],
}

/// Flies both slots through the same world; each slot draws its own sensor,
/// turbulence and planner noise.
pub fn run_paired(setup: &PairedSetup<'_>) -> Result<PairedRun> {
    let fly_slot = |i: usize| -> Result<(FlightSummary, FlightRecord)> {
        let slot = &setup.slots[i];
        let mut fs = FlightSetup::new(setup.scenario, setup.mission, setup.soaring, &slot.aircraft, slot.controller);
        fs.slot = i as u64;
        fs.record_telemetry = setup.record_telemetry;
        fs.max_time = setup.max_time;
        let rec = fly(&fs)?;
        let summary = FlightSummary {
            flight_id: setup.flight_id.clone(),
            site: setup.site.clone(),
            controller: slot.controller,
            airframe: slot.aircraft.name.clone(),
            flight_time: rec.stats.duration,
            baseline_time: slot.baseline_time,
            rel_gain: rel_gain(rec.stats.duration, slot.baseline_time)?,
            thermal_encounters: rec.stats.thermal_entries,
            excluded: false,
        };
        Ok((summary, rec))
    };
    let (s0, r0) = fly_slot(0)?;
    let (s1, r1) = fly_slot(1)?;
    let mut paired = PairedFlight { flights: [s0, s1] };
    let ex = paired.excluded();
    for s in &mut paired.flights {
        s.excluded = ex;
    }
    Ok(PairedRun { paired, records: [r0, r1] })
}
