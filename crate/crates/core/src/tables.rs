//! Reproduction of the bundled reference tables.
//!
//! Each reference file lists one expected value per row together with the
//! tolerance it is checked against:
//!
//! `release_altitude_km,release_speed,burn_time,firing_angle,apogee_km,apogee_speed,quantity,reference,tolerance,mode`
//!
//! `mode` is `rel` (relative), `abs` (absolute), `max` (strict upper bound on
//! the computed value) or `info` (reported, never fails). `NA` marks columns a
//! table does not use.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flight::{integrate_ascent, integrate_descent, optimize_firing_angle, FlightState, LaunchCondition};
use crate::format::sig;
use crate::scenario::{default_angle_grid, ThermalSettings};
use crate::thermal::{heat_sink_march, StationKind};
use crate::vehicle::{blank_comments, csv_parse_error, line_at, ProjectileSpec, RocketSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    RocketPerformance,
    HpvImpact,
    EuroprojectileImpact,
    CylinderHeating,
}

impl TableKind {
    pub const ALL: [TableKind; 4] = [
        TableKind::RocketPerformance,
        TableKind::HpvImpact,
        TableKind::EuroprojectileImpact,
        TableKind::CylinderHeating,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TableKind::RocketPerformance => "rocket_performance",
            TableKind::HpvImpact => "hpv_impact",
            TableKind::EuroprojectileImpact => "europrojectile_impact",
            TableKind::CylinderHeating => "cylinder_heating",
        }
    }

    fn bundled_text(self) -> &'static str {
        match self {
            TableKind::RocketPerformance => include_str!("../data/reference/rocket_performance.csv"),
            TableKind::HpvImpact => include_str!("../data/reference/hpv_impact.csv"),
            TableKind::EuroprojectileImpact => include_str!("../data/reference/europrojectile_impact.csv"),
            TableKind::CylinderHeating => include_str!("../data/reference/cylinder_heating.csv"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rel,
    Abs,
    Max,
    Info,
}

impl Mode {
    pub fn passes(self, computed: f64, reference: f64, tolerance: f64) -> bool {
        match self {
            Mode::Rel => ((computed - reference) / reference).abs() <= tolerance,
            Mode::Abs => (computed - reference).abs() <= tolerance,
            Mode::Max => computed < reference,
            Mode::Info => true,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Mode::Rel => "rel",
            Mode::Abs => "abs",
            Mode::Max => "max",
            Mode::Info => "info",
        }
    }
}

/// Inputs shared by the rows of one table column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCase {
    pub release_altitude_km: f64,
    pub release_speed: f64,
    pub burn_time: f64,
    pub firing_angle: f64,
    pub apogee_km: Option<f64>,
    pub apogee_speed: Option<f64>,
}

impl ReferenceCase {
    fn key(&self) -> [u64; 6] {
        [
            self.release_altitude_km.to_bits(),
            self.release_speed.to_bits(),
            self.burn_time.to_bits(),
            self.firing_angle.to_bits(),
            self.apogee_km.map_or(u64::MAX, f64::to_bits),
            self.apogee_speed.map_or(u64::MAX, f64::to_bits),
        ]
    }

    fn launch(&self, firing_angle: f64) -> LaunchCondition {
        LaunchCondition {
            release_altitude: self.release_altitude_km * 1000.0,
            release_speed: self.release_speed,
            firing_angle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub table: TableKind,
    pub case: ReferenceCase,
    pub quantity: String,
    pub reference: f64,
    pub tolerance: f64,
    pub mode: Mode,
}

pub fn parse_reference(table: TableKind, text: &str) -> Result<Vec<ReferenceRow>> {
    #[derive(Deserialize)]
    struct Raw {
        release_altitude_km: f64,
        release_speed: f64,
        burn_time: f64,
        firing_angle: f64,
        apogee_km: String,
        apogee_speed: String,
        quantity: String,
        reference: f64,
        tolerance: f64,
        mode: Mode,
    }
    let optional = |raw: &str, line: Option<usize>| -> Result<Option<f64>> {
        if raw.trim() == "NA" {
            return Ok(None);
        }
        raw.trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Parse { line, message: format!("`{raw}` is neither a number nor NA") })
    };
    let cleaned = blank_comments(text);
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(cleaned.as_bytes());
    let headers = reader.headers().map_err(|e| csv_parse_error(&cleaned, &e))?.clone();
    let mut record = csv::StringRecord::new();
    let mut rows = Vec::new();
    while reader.read_record(&mut record).map_err(|e| csv_parse_error(&cleaned, &e))? {
        let line = line_at(&cleaned, record.position());
        let raw: Raw = record.deserialize(Some(&headers)).map_err(|e| csv_parse_error(&cleaned, &e))?;
        rows.push(ReferenceRow {
            table,
            case: ReferenceCase {
                release_altitude_km: raw.release_altitude_km,
                release_speed: raw.release_speed,
                burn_time: raw.burn_time,
                firing_angle: raw.firing_angle,
                apogee_km: optional(&raw.apogee_km, line)?,
                apogee_speed: optional(&raw.apogee_speed, line)?,
            },
            quantity: raw.quantity,
            reference: raw.reference,
            tolerance: raw.tolerance,
            mode: raw.mode,
        });
    }
    Ok(rows)
}

/// Every bundled reference row, table by table.
pub fn bundled_reference() -> Vec<ReferenceRow> {
    TableKind::ALL
        .iter()
        .flat_map(|&t| parse_reference(t, t.bundled_text()).expect("bundled reference parses"))
        .collect()
}

#[derive(Debug, Clone)]
pub struct TablesOptions {
    pub dt: f64,
    pub angle_grid: Vec<f64>,
    pub thermal: ThermalSettings,
}

impl Default for TablesOptions {
    fn default() -> Self {
        TablesOptions {
            dt: crate::flight::DEFAULT_DT,
            angle_grid: default_angle_grid(),
            thermal: ThermalSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub row: ReferenceRow,
    pub computed: Option<f64>,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablesReport {
    pub cells: Vec<CellResult>,
}

impl TablesReport {
    pub fn all_pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(|c| !c.pass)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Parse { line: None, message: format!("writing tables CSV: {e}") };
        w.write_record([
            "table",
            "release_altitude_km",
            "release_speed",
            "burn_time",
            "firing_angle",
            "quantity",
            "computed",
            "reference",
            "abs_error",
            "rel_error",
            "tolerance",
            "mode",
            "pass",
        ])
        .map_err(err)?;
        for c in &self.cells {
            let r = &c.row;
            let (computed, abs_err, rel_err) = match c.computed {
                Some(v) => (sig(v, 6), sig(v - r.reference, 6), sig((v - r.reference) / r.reference, 6)),
                None => (c.error.clone().unwrap_or_default(), String::new(), String::new()),
            };
            w.write_record([
                r.table.name().to_string(),
                sig(r.case.release_altitude_km, 6),
                sig(r.case.release_speed, 6),
                sig(r.case.burn_time, 6),
                sig(r.case.firing_angle, 6),
                r.quantity.clone(),
                computed,
                sig(r.reference, 6),
                abs_err,
                rel_err,
                sig(r.tolerance, 6),
                r.mode.as_str().to_string(),
                c.pass.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io("<tables csv>", e))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }
}

/// Computes every quantity a table asks for at one case.
fn compute_case(table: TableKind, case: &ReferenceCase, opts: &TablesOptions) -> Result<BTreeMap<&'static str, f64>> {
    let rocket = RocketSpec::baseline(case.burn_time);
    let dt = opts.dt;
    let ascent = integrate_ascent(&rocket, &case.launch(case.firing_angle), dt)?;
    let mut out = BTreeMap::new();
    match table {
        TableKind::RocketPerformance => {
            let warhead = ProjectileSpec::europrojectile();
            let descent = integrate_descent(&warhead, &ascent.apogee, dt)?;
            out.insert("range_km", descent.range_from_release() / 1000.0);
            out.insert("drag_loss", ascent.drag_loss);
            out.insert("gravity_loss", ascent.gravity_loss);
            out.insert("velocity_gain", ascent.velocity_gain);
            out.insert("apogee_km", ascent.apogee_altitude() / 1000.0);
            out.insert("flight_time", ascent.time_to_apogee() + descent.descent_time());
            let launch = case.launch(case.firing_angle);
            let best = optimize_firing_angle(
                &rocket,
                launch.release_altitude,
                launch.release_speed,
                &warhead,
                dt,
                &opts.angle_grid,
            )?;
            out.insert("firing_angle", best.best_angle);
        }
        TableKind::HpvImpact | TableKind::EuroprojectileImpact => {
            let warhead =
                if table == TableKind::HpvImpact { ProjectileSpec::hpv() } else { ProjectileSpec::europrojectile() };
            let (Some(h_km), Some(speed)) = (case.apogee_km, case.apogee_speed) else {
                return Err(Error::MissingField(format!("{}: apogee_km/apogee_speed", table.name())));
            };
            let apogee = FlightState {
                t: 0.0,
                x: ascent.apogee_downrange(),
                y: h_km * 1000.0,
                vx: speed,
                vy: 0.0,
                mass: warhead.mass,
            };
            let descent = integrate_descent(&warhead, &apogee, dt)?;
            out.insert("range_km", descent.range_from_release() / 1000.0);
            out.insert("impact_speed", descent.impact_speed());
            out.insert("descent_loss", descent.descent_drag_loss);
        }
        TableKind::CylinderHeating => {
            let cfg = opts.thermal.config(&rocket);
            let x = cfg
                .stations
                .iter()
                .find_map(|s| match s.kind {
                    StationKind::CylinderBase { x } => Some(x),
                    _ => None,
                })
                .unwrap_or(1.0);
            let march = heat_sink_march(
                &ascent.series,
                cfg.wall_areal_density,
                cfg.wall_cp,
                cfg.initial_temperature,
                x,
                &cfg.constants,
            )?;
            out.insert("final_temperature_c", march.final_temperature - 273.15);
            out.insert("energy", march.energy);
        }
    }
    Ok(out)
}

/// Recomputes every row of `rows` and checks it against its tolerance.
pub fn reproduce(rows: &[ReferenceRow], opts: &TablesOptions) -> TablesReport {
    let mut cases: Vec<(TableKind, ReferenceCase)> = Vec::new();
    for r in rows {
        if !cases.iter().any(|(t, c)| *t == r.table && c.key() == r.case.key()) {
            cases.push((r.table, r.case));
        }
    }
    let computed: Vec<std::result::Result<BTreeMap<&'static str, f64>, String>> =
        cases.par_iter().map(|(t, c)| compute_case(*t, c, opts).map_err(|e| e.to_string())).collect();

    let cells = rows
        .iter()
        .map(|row| {
            let i =
                cases.iter().position(|(t, c)| *t == row.table && c.key() == row.case.key()).expect("case collected");
            let (computed, error) = match &computed[i] {
                Ok(values) => match values.get(row.quantity.as_str()) {
                    Some(&v) => (Some(v), None),
                    None => (None, Some(format!("unknown quantity `{}`", row.quantity))),
                },
                Err(e) => (None, Some(e.clone())),
            };
            let pass = computed.is_some_and(|v| row.mode.passes(v, row.reference, row.tolerance));
            CellResult { row: row.clone(), computed, error, pass }
        })
        .collect();
    TablesReport { cells }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_files_parse() {
        let rows = bundled_reference();
        assert_eq!(rows.len(), 15 * 7 + 2 * 9 * 3 + 15 * 2);
        assert!(rows.iter().all(|r| r.reference.is_finite()));
        let impact = rows.iter().find(|r| r.table == TableKind::HpvImpact).unwrap();
        assert_eq!(impact.case.apogee_km, Some(93.0));
    }

    #[test]
    fn modes() {
        assert!(Mode::Rel.passes(102.0, 100.0, 0.02));
        assert!(!Mode::Rel.passes(102.1, 100.0, 0.02));
        assert!(Mode::Abs.passes(-5.0, 5.0, 10.0));
        assert!(!Mode::Max.passes(9.9e5, 9.9e5, 0.0));
        assert!(Mode::Info.passes(1e9, 0.0, 0.0));
    }

    #[test]
    fn bad_reference_row_reports_line() {
        let text = "# c\nrelease_altitude_km,release_speed,burn_time,firing_angle,apogee_km,apogee_speed,quantity,reference,tolerance,mode\n\
                    12,500,30,54,x,NA,range_km,327,0.02,rel\n";
        assert!(matches!(parse_reference(TableKind::HpvImpact, text), Err(Error::Parse { line: Some(3), .. })));
    }

    #[test]
    fn single_case_reproduces() {
        let rows: Vec<_> = bundled_reference()
            .into_iter()
            .filter(|r| {
                r.table == TableKind::EuroprojectileImpact && r.case.burn_time == 50.0 && r.case.release_speed == 600.0
            })
            .collect();
        assert_eq!(rows.len(), 3);
        let report = reproduce(&rows, &TablesOptions::default());
        assert!(report.all_pass(), "{:?}", report.failures().collect::<Vec<_>>());
    }
}
