//! Per-flight CSV rows and the aggregate JSON report.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use soar_core::experiment::{rel_gain, FlightSummary, PairedFlight, Report, Tally};
use soar_core::mission::ThermalController;

use crate::error::{Result, SimError};

/// One CSV row per aircraft per flight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightRow {
    pub flight_id: String,
    pub site: String,
    pub controller: String,
    pub airframe: String,
    pub flight_time_s: f64,
    pub baseline_time_s: f64,
    pub rel_gain: f64,
    pub gain_pct: f64,
    pub thermal_encounters: u32,
    pub excluded: bool,
}

impl From<&FlightSummary> for FlightRow {
    fn from(s: &FlightSummary) -> Self {
        Self {
            flight_id: s.flight_id.clone(),
            site: s.site.clone(),
            controller: s.controller.as_str().into(),
            airframe: s.airframe.clone(),
            flight_time_s: s.flight_time,
            baseline_time_s: s.baseline_time,
            rel_gain: s.rel_gain,
            gain_pct: s.gain_percent(),
            thermal_encounters: s.thermal_encounters,
            excluded: s.excluded,
        }
    }
}

fn parse_controller(s: &str) -> Result<ThermalController> {
    match s {
        "pomdsoar" => Ok(ThermalController::Pomdsoar),
        "baseline" => Ok(ThermalController::Baseline),
        other => Err(SimError::Scenario(format!("unknown controller `{other}`"))),
    }
}

impl FlightRow {
    /// Rebuilds the summary; `rel_gain` is recomputed from the two times.
    pub fn to_summary(&self) -> Result<FlightSummary> {
        Ok(FlightSummary {
            flight_id: self.flight_id.clone(),
            site: self.site.clone(),
            controller: parse_controller(&self.controller)?,
            airframe: self.airframe.clone(),
            flight_time: self.flight_time_s,
            baseline_time: self.baseline_time_s,
            rel_gain: rel_gain(self.flight_time_s, self.baseline_time_s)?,
            thermal_encounters: self.thermal_encounters,
            excluded: self.excluded,
        })
    }
}

pub fn write_flights_csv<W: Write>(out: W, flights: &[PairedFlight]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for f in flights {
        for s in &f.flights {
            w.serialize(FlightRow::from(s))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads rows and pairs them by flight id.
pub fn read_flights_csv<R: Read>(input: R, origin: &str) -> Result<Vec<PairedFlight>> {
    let mut groups: BTreeMap<String, Vec<FlightSummary>> = BTreeMap::new();
    for row in csv::Reader::from_reader(input).deserialize::<FlightRow>() {
        let row = row.map_err(|source| SimError::Csv { path: origin.into(), source })?;
        groups.entry(row.flight_id.clone()).or_default().push(row.to_summary()?);
    }
    groups
        .into_iter()
        .map(|(id, rows)| {
            <[FlightSummary; 2]>::try_from(rows)
                .map(|flights| PairedFlight { flights })
                .map_err(|rows| SimError::Scenario(format!("flight {id}: expected 2 rows, got {}", rows.len())))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TallyJson {
    pub wins: u32,
    pub losses: u32,
    pub draws: u32,
}

impl From<Tally> for TallyJson {
    fn from(t: Tally) -> Self {
        Self { wins: t.wins, losses: t.losses, draws: t.draws }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlightOutcomeJson {
    pub flight_id: String,
    pub excluded: bool,
    pub pomdsoar_gain_pct: Option<f64>,
    pub baseline_gain_pct: Option<f64>,
    pub outcome: Option<&'static str>,
    pub raw_outcome: Option<&'static str>,
}

/// Aggregate written as `report.json`. Outcomes are POMDSoar's.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportJson {
    pub flights: usize,
    pub excluded: u32,
    pub tally: TallyJson,
    pub sign_test_p: f64,
    pub raw_time_tally: TallyJson,
    pub raw_time_sign_test_p: f64,
    pub median_rel_gain_pomdsoar: Option<f64>,
    pub median_rel_gain_baseline: Option<f64>,
    pub per_flight: Vec<FlightOutcomeJson>,
}

impl From<&Report> for ReportJson {
    fn from(r: &Report) -> Self {
        let gain = |f: &PairedFlight, c| f.by_controller(c).map(FlightSummary::gain_percent);
        Self {
            flights: r.flights.len(),
            excluded: r.excluded,
            tally: r.tally.into(),
            sign_test_p: r.p_value,
            raw_time_tally: r.raw_tally.into(),
            raw_time_sign_test_p: r.raw_tally.sign_test_p(),
            median_rel_gain_pomdsoar: r.median_gain_pomdsoar,
            median_rel_gain_baseline: r.median_gain_baseline,
            per_flight: r
                .flights
                .iter()
                .map(|f| FlightOutcomeJson {
                    flight_id: f.flights[0].flight_id.clone(),
                    excluded: f.excluded(),
                    pomdsoar_gain_pct: gain(f, ThermalController::Pomdsoar),
                    baseline_gain_pct: gain(f, ThermalController::Baseline),
                    outcome: f.outcome().map(|o| o.as_str()),
                    raw_outcome: f.raw_outcome().map(|o| o.as_str()),
                })
                .collect(),
        }
    }
}

pub fn write_report_json<W: Write>(out: W, r: &Report) -> serde_json::Result<()> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, &ReportJson::from(r))?;
    out.write_all(b"\n").map_err(serde_json::Error::io)
}
