//! Subcommand orchestration: runs a scenario and writes its CSV files and a
//! JSON report into an output directory.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flight::{
    integrate_ascent_in, integrate_descent_in, optimize_firing_angle_in, AscentResult, FiringSolution, FlightState,
    ImpactResult, DEFAULT_DT,
};
use crate::format::sig;
use crate::scenario::{default_angle_grid, Scenario, ThermalSettings};
use crate::tables::{bundled_reference, reproduce, TablesOptions};
use crate::thermal::{analyze, StagnationCorrelation, ThermalSummary};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Ascent,
    Impact,
    Thermal,
    Sweep,
    Tables,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Ascent => "ascent",
            Subcommand::Impact => "impact",
            Subcommand::Thermal => "thermal",
            Subcommand::Sweep => "sweep",
            Subcommand::Tables => "tables",
        }
    }
}

/// Command-line overrides applied on top of the scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub correlation: Option<StagnationCorrelation>,
}

impl Overrides {
    pub fn apply(&self, scenario: &mut Scenario) -> Result<()> {
        if let Some(dt) = self.dt {
            scenario.dt = dt;
        }
        if let Some(c) = self.correlation {
            scenario.thermal.correlation = c;
        }
        scenario.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AscentSummary {
    pub firing_angle: f64,
    pub apogee_altitude: f64,
    pub apogee_speed: f64,
    pub apogee_downrange: f64,
    pub time_to_apogee: f64,
    pub drag_loss: f64,
    pub gravity_loss: f64,
    pub velocity_gain: f64,
}

impl AscentSummary {
    fn new(firing_angle: f64, a: &AscentResult) -> Self {
        AscentSummary {
            firing_angle,
            apogee_altitude: a.apogee_altitude(),
            apogee_speed: a.apogee_speed(),
            apogee_downrange: a.apogee_downrange(),
            time_to_apogee: a.time_to_apogee(),
            drag_loss: a.drag_loss,
            gravity_loss: a.gravity_loss,
            velocity_gain: a.velocity_gain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactSummary {
    pub range_from_release: f64,
    pub impact_speed: f64,
    pub descent_time: f64,
    pub descent_drag_loss: f64,
    pub drag_integral: f64,
    /// Time to apogee plus descent time; absent when the descent started
    /// from a given apogee state.
    pub flight_time: Option<f64>,
}

impl ImpactSummary {
    fn new(d: &ImpactResult, ascent_time: Option<f64>) -> Self {
        ImpactSummary {
            range_from_release: d.range_from_release(),
            impact_speed: d.impact_speed(),
            descent_time: d.descent_time(),
            descent_drag_loss: d.descent_drag_loss,
            drag_integral: d.drag_integral,
            flight_time: ascent_time.map(|t| t + d.descent_time()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationSummary {
    pub best_angle: f64,
    pub best_range: f64,
    pub failed_angles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub release_altitude: f64,
    pub release_speed: f64,
    pub burn_time: f64,
    pub directory: String,
    pub firing_angle: Option<f64>,
    pub apogee_altitude: Option<f64>,
    pub range_from_release: Option<f64>,
    pub impact_speed: Option<f64>,
    pub max_stagnation_temperature: Option<f64>,
    pub cylinder_final_temperature: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablesSummary {
    pub cells: usize,
    pub failed: usize,
    pub all_pass: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub subcommand: Subcommand,
    pub scenario: Option<Scenario>,
    pub optimization: Option<OptimizationSummary>,
    pub ascent: Option<AscentSummary>,
    pub impact: Option<ImpactSummary>,
    pub thermal: Option<ThermalSummary>,
    pub sweep: Option<Vec<SweepPoint>>,
    pub tables: Option<TablesSummary>,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunReport {
    fn new(subcommand: Subcommand, scenario: Option<&Scenario>) -> Self {
        RunReport {
            tool_version: TOOL_VERSION.to_string(),
            subcommand,
            scenario: scenario.cloned(),
            optimization: None,
            ascent: None,
            impact: None,
            thermal: None,
            sweep: None,
            tables: None,
            outputs: Vec::new(),
        }
    }

    /// False only for a `tables` run with a cell outside its tolerance.
    pub fn within_tolerance(&self) -> bool {
        self.tables.as_ref().is_none_or(|t| t.all_pass)
    }
}

/// Runs `subcommand` and writes its outputs under `out_dir`, creating it if
/// needed. `tables` runs without a scenario; the others require one.
pub fn run(
    subcommand: Subcommand,
    scenario: Option<&Scenario>,
    overrides: &Overrides,
    out_dir: &Path,
) -> Result<RunReport> {
    let scenario = match scenario {
        Some(s) => {
            let mut s = s.clone();
            overrides.apply(&mut s)?;
            Some(s)
        }
        None => None,
    };
    let scenario = scenario.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut report = RunReport::new(subcommand, scenario);
    let require = || scenario.ok_or_else(|| Error::MissingField("scenario".into()));
    match subcommand {
        Subcommand::Ascent => {
            let s = require()?;
            let (angle, ascent) = fly_ascent(s, out_dir, &mut report)?;
            report.ascent = Some(AscentSummary::new(angle, &ascent));
        }
        Subcommand::Impact => {
            let s = require()?;
            let (start, ascent_time) = match &s.apogee {
                Some(a) => {
                    let state = FlightState {
                        t: 0.0,
                        x: a.downrange,
                        y: a.altitude,
                        vx: a.speed,
                        vy: 0.0,
                        mass: s.projectile.mass,
                    };
                    (state, None)
                }
                None => {
                    let (angle, ascent) = fly_ascent(s, out_dir, &mut report)?;
                    report.ascent = Some(AscentSummary::new(angle, &ascent));
                    (ascent.apogee, Some(ascent.time_to_apogee()))
                }
            };
            let descent = integrate_descent_in(s.air(), &s.projectile, &start, s.dt)?;
            save(out_dir, "descent.csv", &mut report, |p| descent.series.save_csv(p))?;
            report.impact = Some(ImpactSummary::new(&descent, ascent_time));
        }
        Subcommand::Thermal => {
            let s = require()?;
            let (angle, ascent) = fly_ascent(s, out_dir, &mut report)?;
            let thermal = analyze(&ascent.series, &s.thermal_config())?;
            save(out_dir, "thermal.csv", &mut report, |p| thermal.save_csv(p))?;
            report.ascent = Some(AscentSummary::new(angle, &ascent));
            report.thermal = Some(thermal.summary());
        }
        Subcommand::Sweep => {
            let s = require()?;
            let grid = s.sweep.as_ref().ok_or_else(|| Error::MissingField("sweep".into()))?;
            let points: Vec<SweepPoint> = grid
                .points()
                .par_iter()
                .enumerate()
                .map(|(i, &(h, v, tb))| sweep_point(s, i, h, v, tb, out_dir))
                .collect();
            let path = out_dir.join("sweep.csv");
            write_sweep_csv(&points, &path)?;
            report.outputs.push("sweep.csv".into());
            for p in &points {
                if p.error.is_none() {
                    for f in ["ascent.csv", "descent.csv", "thermal.csv"] {
                        report.outputs.push(format!("{}/{f}", p.directory));
                    }
                }
            }
            report.sweep = Some(points);
        }
        Subcommand::Tables => {
            let opts = match scenario {
                Some(s) => TablesOptions { dt: s.dt, angle_grid: s.angle_grid.clone(), thermal: s.thermal.clone() },
                None => {
                    let mut thermal = ThermalSettings::default();
                    if let Some(c) = overrides.correlation {
                        thermal.correlation = c;
                    }
                    let dt = overrides.dt.unwrap_or(DEFAULT_DT);
                    crate::flight::check_dt(dt)?;
                    TablesOptions { dt, angle_grid: default_angle_grid(), thermal }
                }
            };
            let tables = reproduce(&bundled_reference(), &opts);
            save(out_dir, "tables.csv", &mut report, |p| tables.save_csv(p))?;
            let failures: Vec<String> = tables
                .failures()
                .map(|c| {
                    let r = &c.row;
                    let got = c.computed.map_or_else(|| c.error.clone().unwrap_or_default(), |v| sig(v, 6));
                    format!(
                        "{} {}km/{}m/s/{}s {}: computed {} reference {}",
                        r.table.name(),
                        sig(r.case.release_altitude_km, 6),
                        sig(r.case.release_speed, 6),
                        sig(r.case.burn_time, 6),
                        r.quantity,
                        got,
                        sig(r.reference, 6)
                    )
                })
                .collect();
            report.tables = Some(TablesSummary {
                cells: tables.cells.len(),
                failed: failures.len(),
                all_pass: failures.is_empty(),
                failures,
            });
        }
    }
    report.outputs.push("report.json".into());
    let path = out_dir.join("report.json");
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(report)
}

fn save(out_dir: &Path, name: &str, report: &mut RunReport, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    write(&out_dir.join(name))?;
    report.outputs.push(name.to_string());
    Ok(())
}

/// Resolves the firing angle, optimizing when the scenario leaves it open,
/// then flies the ascent and writes `ascent.csv` (and `angles.csv`).
fn fly_ascent(s: &Scenario, out_dir: &Path, report: &mut RunReport) -> Result<(f64, AscentResult)> {
    let angle = match s.launch.firing_angle {
        Some(a) => a,
        None => {
            let solution = optimize(s)?;
            let path = out_dir.join("angles.csv");
            write_angles_csv(&solution, &path)?;
            report.outputs.push("angles.csv".into());
            report.optimization = Some(OptimizationSummary {
                best_angle: solution.best_angle,
                best_range: solution.best_range,
                failed_angles: solution.table.iter().filter(|o| o.range.is_err()).count(),
            });
            solution.best_angle
        }
    };
    let ascent = integrate_ascent_in(s.air(), &s.rocket, &s.launch.with_angle(angle), s.dt)?;
    save(out_dir, "ascent.csv", report, |p| ascent.series.save_csv(p))?;
    Ok((angle, ascent))
}

fn optimize(s: &Scenario) -> Result<FiringSolution> {
    optimize_firing_angle_in(
        s.air(),
        &s.rocket,
        s.launch.release_altitude,
        s.launch.release_speed,
        &s.projectile,
        s.dt,
        &s.angle_grid,
    )
}

fn sweep_point(s: &Scenario, index: usize, h: f64, v: f64, tb: f64, out_dir: &Path) -> SweepPoint {
    let directory = format!("point_{index:03}");
    let mut point = SweepPoint {
        release_altitude: h,
        release_speed: v,
        burn_time: tb,
        directory: directory.clone(),
        firing_angle: None,
        apogee_altitude: None,
        range_from_release: None,
        impact_speed: None,
        max_stagnation_temperature: None,
        cylinder_final_temperature: None,
        error: None,
    };
    let result = (|| -> Result<()> {
        let mut local = s.clone();
        local.launch.release_altitude = h;
        local.launch.release_speed = v;
        local.rocket.burn_time = tb;
        local.sweep = None;
        local.validate()?;
        let dir = out_dir.join(&directory);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let angle = match local.launch.firing_angle {
            Some(a) => a,
            None => optimize(&local)?.best_angle,
        };
        point.firing_angle = Some(angle);
        let ascent = integrate_ascent_in(local.air(), &local.rocket, &local.launch.with_angle(angle), local.dt)?;
        ascent.series.save_csv(&dir.join("ascent.csv"))?;
        point.apogee_altitude = Some(ascent.apogee_altitude());
        let descent = integrate_descent_in(local.air(), &local.projectile, &ascent.apogee, local.dt)?;
        descent.series.save_csv(&dir.join("descent.csv"))?;
        point.range_from_release = Some(descent.range_from_release());
        point.impact_speed = Some(descent.impact_speed());
        let thermal = analyze(&ascent.series, &local.thermal_config())?;
        thermal.save_csv(&dir.join("thermal.csv"))?;
        let summary = thermal.summary();
        point.max_stagnation_temperature = thermal
            .stations
            .iter()
            .position(|st| matches!(st.kind, crate::thermal::StationKind::Stagnation))
            .map(|i| summary.stations[i].max_temperature);
        point.cylinder_final_temperature = summary.cylinder_final_temperature;
        Ok(())
    })();
    if let Err(e) = result {
        point.error = Some(e.to_string());
    }
    point
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| sig(v, 6)).unwrap_or_default()
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Parse { line: None, message: format!("writing {}: {e}", path.display()) }
}

fn write_angles_csv(solution: &FiringSolution, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(["firing_angle", "range", "status"]).map_err(csv_error(path))?;
    for o in &solution.table {
        let (range, status) = match &o.range {
            Ok(r) => (sig(*r, 6), "ok".to_string()),
            Err(e) => (String::new(), e.clone()),
        };
        w.write_record([sig(o.angle, 6), range, status]).map_err(csv_error(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_sweep_csv(points: &[SweepPoint], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record([
        "release_altitude",
        "release_speed",
        "burn_time",
        "directory",
        "firing_angle",
        "apogee_altitude",
        "range",
        "impact_speed",
        "T_stag_max",
        "T_cyl_final",
        "status",
    ])
    .map_err(csv_error(path))?;
    for p in points {
        w.write_record([
            sig(p.release_altitude, 6),
            sig(p.release_speed, 6),
            sig(p.burn_time, 6),
            p.directory.clone(),
            opt(p.firing_angle),
            opt(p.apogee_altitude),
            opt(p.range_from_release),
            opt(p.impact_speed),
            opt(p.max_stagnation_temperature),
            opt(p.cylinder_final_temperature),
            p.error.clone().unwrap_or_else(|| "ok".into()),
        ])
        .map_err(csv_error(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
