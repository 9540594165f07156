use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use soar_core::experiment::report;
use soar_core::flight::FlightRecord;
use soar_core::mission::{FlightMode, ThermalController};
use soar_sim::params::ParamFile;
use soar_sim::report::{read_flights_csv, write_flights_csv, write_report_json};
use soar_sim::scenario::ScenarioFile;
use soar_sim::telemetry::write_jsonl;
use soar_sim::{Plan, Result, SimError};

#[derive(Parser)]
#[command(name = "soar", version, about = "Thermal soaring mission simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fly one aircraft through one world.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        controller: Option<Controller>,
        /// Index into the scenario's aircraft list.
        #[arg(long, default_value_t = 0)]
        aircraft: usize,
    },
    /// Calm-day baseline flight time of each aircraft.
    Baseline {
        #[command(flatten)]
        common: Common,
    },
    /// One paired flight with full telemetry.
    Paired {
        #[command(flatten)]
        common: Common,
        /// Position in the swap schedule; odd values swap the controllers.
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
    /// Aggregate an existing flights CSV.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// A batch of paired flights on consecutive seeds.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Number of paired flights (defaults to the scenario's experiment.flights).
        #[arg(long)]
        flights: Option<u32>,
        /// Also write telemetry for every flight.
        #[arg(long)]
        telemetry: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// KEY=VALUE parameter file.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Controller {
    Pomdsoar,
    Baseline,
}

impl From<Controller> for ThermalController {
    fn from(c: Controller) -> Self {
        match c {
            Controller::Pomdsoar => ThermalController::Pomdsoar,
            Controller::Baseline => ThermalController::Baseline,
        }
    }
}

impl Common {
    fn load(&self) -> Result<(Plan, u64)> {
        let file = ScenarioFile::load(&self.scenario)?;
        let mut cfg = Plan::base_config(&file);
        if let Some(p) = &self.params {
            ParamFile::load(p)?.apply(&mut cfg)?;
        }
        let seed = self.seed.unwrap_or(file.seed);
        Ok((Plan::new(file, cfg)?, seed))
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir).map_err(|source| SimError::Output { path: dir.into(), source })?;
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|source| SimError::Output { path, source })
}

fn write_with<F>(dir: &Path, name: &str, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = create(dir, name)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|source| SimError::Output { path: dir.join(name), source })
}

fn to_io<E: Into<Box<dyn std::error::Error + Send + Sync>>>(e: E) -> std::io::Error {
    std::io::Error::other(e)
}

#[derive(Serialize)]
struct RunSummary<'a> {
    flight_id: &'a str,
    controller: &'static str,
    airframe: &'a str,
    duration_s: f64,
    energy_used_j: f64,
    auto_climb_s: f64,
    auto_glide_s: f64,
    thermalling_s: f64,
    thermal_entries: u32,
    planner_cycles: u64,
    end_reason: &'static str,
}

#[derive(Serialize)]
struct BaselineJson<'a> {
    site: &'a str,
    seed: u64,
    repetitions: u32,
    baseline_time_s: Vec<(&'a str, f64)>,
}

fn write_baselines(dir: &Path, plan: &Plan, seed: u64, times: &[f64]) -> Result<()> {
    let body = BaselineJson {
        site: &plan.file.site,
        seed,
        repetitions: plan.file.experiment.baseline_repetitions,
        baseline_time_s: plan.file.aircraft.iter().map(|a| a.name.as_str()).zip(times.iter().copied()).collect(),
    };
    write_with(dir, "baseline.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &body).map_err(to_io)?;
        w.write_all(b"\n")
    })
}

fn write_telemetry(dir: &Path, runs: &[(String, [&FlightRecord; 2])]) -> Result<()> {
    write_with(dir, "telemetry.jsonl", |w| {
        for (id, recs) in runs {
            for (slot, r) in recs.iter().enumerate() {
                write_jsonl(w, id, slot, &r.telemetry)?;
            }
        }
        Ok(())
    })
}

fn write_report(dir: &Path, flights: Vec<soar_core::experiment::PairedFlight>) -> Result<()> {
    let rep = report(flights)?;
    write_with(dir, "flights.csv", |w| write_flights_csv(&mut *w, &rep.flights).map_err(to_io))?;
    write_with(dir, "report.json", |w| write_report_json(&mut *w, &rep).map_err(to_io))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { common, controller, aircraft } => {
            let (plan, seed) = common.load()?;
            let controller = controller.map(Into::into).unwrap_or(plan.config.controller);
            let rec = plan.run_single(seed, aircraft, controller, true)?;
            let id = plan.flight_id(seed);
            write_with(&common.out, "telemetry.jsonl", |w| write_jsonl(w, &id, aircraft, &rec.telemetry))?;
            let s = &rec.stats;
            let summary = RunSummary {
                flight_id: &id,
                controller: controller.as_str(),
                airframe: &plan.file.aircraft[aircraft].name,
                duration_s: s.duration,
                energy_used_j: s.energy_used_j,
                auto_climb_s: s.mode_time[FlightMode::AutoClimb.index()],
                auto_glide_s: s.mode_time[FlightMode::AutoGlide.index()],
                thermalling_s: s.mode_time[FlightMode::Thermalling.index()],
                thermal_entries: s.thermal_entries,
                planner_cycles: s.planner_cycles,
                end_reason: s.end_reason.as_str(),
            };
            write_with(&common.out, "summary.json", |w| {
                serde_json::to_writer_pretty(&mut *w, &summary).map_err(to_io)?;
                w.write_all(b"\n")
            })
        }
        Command::Baseline { common } => {
            let (plan, seed) = common.load()?;
            let times = plan.baselines(seed)?;
            write_baselines(&common.out, &plan, seed, &times)
        }
        Command::Paired { common, index } => {
            let (plan, seed) = common.load()?;
            let times = plan.baselines(seed)?;
            let run = plan.run_pair(seed, index, &times, true)?;
            write_baselines(&common.out, &plan, seed, &times)?;
            write_telemetry(&common.out, &[(plan.flight_id(seed), [&run.records[0], &run.records[1]])])?;
            write_report(&common.out, vec![run.paired])
        }
        Command::Report { input, out } => {
            let f = File::open(&input).map_err(|source| SimError::Input { path: input.clone(), source })?;
            let flights = read_flights_csv(f, &input.display().to_string())?;
            if flights.is_empty() {
                return Err(SimError::Scenario(format!("{}: no flights", input.display())));
            }
            write_report(&out, flights)
        }
        Command::Sweep { common, flights, telemetry } => {
            let (plan, seed) = common.load()?;
            let n = flights.unwrap_or(plan.file.experiment.flights);
            if n == 0 {
                return Err(SimError::Scenario("sweep needs at least one flight".into()));
            }
            let times = plan.baselines(seed)?;
            let runs = plan.sweep(seed, n, &times, telemetry)?;
            write_baselines(&common.out, &plan, seed, &times)?;
            if telemetry {
                let tel: Vec<_> = runs
                    .iter()
                    .map(|r| (r.paired.flights[0].flight_id.clone(), [&r.records[0], &r.records[1]]))
                    .collect();
                write_telemetry(&common.out, &tel)?;
            }
            write_report(&common.out, runs.into_iter().map(|r| r.paired).collect())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("soar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
