//! JSON-lines telemetry, one record per 0.2 s.

use std::io::Write;

use serde::Serialize;
use soar_core::flight::TelemetryRecord;
use soar_core::planner::PlannerMode;

#[derive(Debug, Serialize)]
pub struct TelemetryLine<'a> {
    pub flight_id: &'a str,
    pub slot: usize,
    pub t: f64,
    pub ground: [f64; 2],
    pub air: [f64; 2],
    pub h: f64,
    pub mode: &'static str,
    pub phi: f64,
    pub target_bank: f64,
    pub vario: Option<f64>,
    pub filtered_lift: f64,
    pub battery_j: f64,
    pub belief_mean: Option<[f64; 4]>,
    pub belief_trace: Option<f64>,
    pub planner_mode: Option<&'static str>,
    /// `[bank, score]` per candidate action.
    pub planner_scores: Option<Vec<[f64; 2]>>,
}

impl<'a> TelemetryLine<'a> {
    pub fn new(flight_id: &'a str, slot: usize, r: &TelemetryRecord) -> Self {
        Self {
            flight_id,
            slot,
            t: r.t,
            ground: [r.ground.x, r.ground.y],
            air: [r.air.x, r.air.y],
            h: r.h,
            mode: r.mode.as_str(),
            phi: r.phi,
            target_bank: r.target_bank,
            vario: r.vario,
            filtered_lift: r.filtered_lift,
            battery_j: r.battery_j,
            belief_mean: r.belief_mean,
            belief_trace: r.belief_trace,
            planner_mode: r.planner.as_ref().map(|d| match d.mode {
                PlannerMode::Explore => "explore",
                PlannerMode::Exploit => "exploit",
            }),
            planner_scores: r.planner.as_ref().map(|d| d.per_action_scores.iter().map(|&(b, s)| [b, s]).collect()),
        }
    }
}

pub fn write_jsonl<W: Write>(out: &mut W, flight_id: &str, slot: usize, records: &[TelemetryRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, &TelemetryLine::new(flight_id, slot, r))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
